"""Protocol-driver tests: herald budgets, fidelity limits, analytics, presets."""

import math
from dataclasses import replace

import numpy as np
import pytest

from pmesim.presets import DETECTOR_EFFICIENCY, SPECIES, species
from pmesim.protocols import (
    KINDS,
    NodeParams,
    ProtocolConfig,
    analytic_herald_prob,
    balance_excitation,
    phase_jitter_fidelity,
    prepare_node_state,
    rate_ratio_number_vs_two_photon,
    run_protocol,
    splitter_imbalance_infidelity,
)


def node(p_e=1.0, gamma=1.0, eps=0.01, path=0.0):
    return NodeParams(excitation_probability=p_e, branching_ratio=gamma,
                      solid_angle_fraction=eps, transmission=1.0,
                      detector_efficiency=1.0, path_offset=path)


def config(kind, p_e=None, gamma=1.0, eps=0.01, **kwargs):
    if p_e is None:
        p_e = 0.05 if kind == "number" else 1.0
    n = node(p_e, gamma, eps)
    return ProtocolConfig(kind=kind, node0=n, node1=n, **kwargs)


class TestPrepareNodeState:
    def test_number_no_excitation_stays_down(self):
        state = prepare_node_state("number", 0, node(p_e=0.0))
        rho = state.ion_density_matrix()
        assert rho[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert state.trace() == pytest.approx(1.0, abs=1e-12)

    def test_number_full_excitation_emits_deterministically(self):
        state = prepare_node_state("number", 0, node(p_e=1.0, gamma=1.0))
        rho = state.ion_density_matrix()
        assert rho[2, 2] == pytest.approx(1.0, abs=1e-12)  # ion 1 up
        photon_mode = state.modes[0]
        assert state.mean_photon_number(photon_mode) == pytest.approx(1.0, abs=1e-12)

    def test_number_branching_traced_as_loss(self):
        gamma = 0.7
        state = prepare_node_state("number", 0, node(p_e=1.0, gamma=gamma))
        photon_mode = state.modes[0]
        assert state.mean_photon_number(photon_mode) == pytest.approx(gamma, abs=1e-12)
        state.validate()

    def test_time_bin_is_maximally_entangled_with_bin_qubit(self):
        state = prepare_node_state("time-bin", 0, node(p_e=1.0, gamma=1.0))
        rho = state.ion_density_matrix()
        # reduced ion 1 state is maximally mixed
        ion1 = np.array([[rho[0, 0] + rho[1, 1], rho[0, 2] + rho[1, 3]],
                         [rho[2, 0] + rho[3, 1], rho[2, 2] + rho[3, 3]]])
        assert np.allclose(ion1, np.eye(2) / 2.0, atol=1e-12)
        # concurrence of a pure two-qubit state: 2 sqrt(det of a reduced side)
        concurrence = 2.0 * math.sqrt(abs(np.linalg.det(ion1)))
        assert concurrence == pytest.approx(1.0, abs=1e-12)

    def test_frequency_requires_splitting(self):
        with pytest.raises(ValueError):
            prepare_node_state("frequency", 0, node(), frequency_splitting=0.0)


class TestRunProtocol:
    def test_number_example_budget_and_fidelity(self):
        cfg = config("number", p_e=0.05, gamma=1.0, eps=0.01)
        table = run_protocol(cfg)
        assert table.total_success == pytest.approx(2 * 0.05 * 0.01, rel=0.05)
        for entry in table.valid_entries():
            assert entry.fidelity == pytest.approx(1.0 - 0.05, abs=0.01)

    def test_polarization_enhanced_and_plain_budgets(self):
        enhanced = run_protocol(config("polarization", enhanced_analyzer=True))
        plain = run_protocol(config("polarization", enhanced_analyzer=False))
        assert enhanced.total_success == pytest.approx(0.5 * (0.01) ** 2, rel=0.01)
        assert plain.total_success == pytest.approx(0.25 * (0.01) ** 2, rel=0.01)

    @pytest.mark.parametrize("kind", KINDS)
    def test_zero_epsilon_never_heralds(self, kind):
        cfg = config(kind, eps=0.0)
        assert run_protocol(cfg).total_success == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("kind", KINDS)
    def test_pattern_probabilities_sum_to_one(self, kind):
        cfg = config(kind, gamma=0.94, eps=0.02,
                     enhanced_analyzer=(kind in ("polarization", "frequency")),
                     mode_overlap=0.97)
        table = run_protocol(cfg)
        assert table.total_probability() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("kind,p_e,eps", [
        ("number", 0.05, 0.02), ("number", 0.01, 0.01),
        ("time-bin", 1.0, 0.02), ("time-bin", 0.8, 0.01),
        ("polarization", 1.0, 0.02), ("frequency", 1.0, 0.015),
    ])
    def test_leading_order_budget_agreement(self, kind, p_e, eps):
        cfg = config(kind, p_e=p_e, gamma=0.94, eps=eps,
                     enhanced_analyzer=(kind in ("polarization", "frequency")))
        table = run_protocol(cfg)
        analytic = analytic_herald_prob(cfg)
        assert abs(table.total_success - analytic) / analytic <= 0.05

    def test_enhanced_analyzer_doubles_success_exactly(self):
        for kind in ("polarization", "frequency"):
            enhanced = run_protocol(config(kind, enhanced_analyzer=True))
            plain = run_protocol(config(kind, enhanced_analyzer=False))
            assert enhanced.total_success / plain.total_success == pytest.approx(
                2.0, abs=1e-9)

    def test_time_bin_herald_sign_rule(self):
        table = run_protocol(config("time-bin"))
        for entry in table.valid_entries():
            ports = {name[1] for name in entry.pattern}
            expected = "psi_plus" if len(ports) == 1 else "psi_minus"
            assert entry.target == expected
            assert entry.fidelity == pytest.approx(1.0, abs=1e-10)

    def test_mode_overlap_monotone_and_ideal_at_one(self):
        fidelities = []
        for overlap in np.linspace(1.0, 0.0, 10):
            cfg = config("polarization", enhanced_analyzer=True,
                         mode_overlap=float(overlap))
            fidelities.append(run_protocol(cfg).dominant_herald().fidelity)
        assert fidelities[0] == pytest.approx(1.0, abs=1e-10)
        assert all(f1 >= f2 - 1e-12 for f1, f2 in zip(fidelities, fidelities[1:]))

    def test_mode_overlap_penalty_scales(self):
        # two-photon heralds lose coherence linearly in the squared overlap
        cfg = config("polarization", enhanced_analyzer=True, mode_overlap=0.9)
        f = run_protocol(cfg).dominant_herald().fidelity
        assert f == pytest.approx((1.0 + 0.9) / 2.0, abs=1e-9)
        # single-photon heralds scale with the amplitude overlap
        cfg = config("number", p_e=1e-6, eps=0.01, mode_overlap=0.9)
        f = run_protocol(cfg).dominant_herald().fidelity
        assert f == pytest.approx((1.0 + math.sqrt(0.9)) / 2.0, abs=1e-6)

    def test_thermal_factor_passthrough(self):
        cfg = replace(config("number", p_e=0.02), thermal_fidelity_factor=0.9)
        rescaled = run_protocol(cfg).dominant_herald().fidelity
        bare = run_protocol(config("number", p_e=0.02)).dominant_herald().fidelity
        assert rescaled == pytest.approx(0.9 * bare, abs=1e-12)

    def test_crosstalk_forbidden_for_single_channel_kinds(self):
        with pytest.raises(ValueError):
            config("number", crosstalk=0.1)
        with pytest.raises(ValueError):
            config("time-bin", crosstalk=0.1)


class TestConfigValidation:
    def test_time_bin_separation_must_exceed_lifetime(self):
        with pytest.raises(ValueError):
            config("time-bin", bin_separation=5e-9, lifetime=8e-9)

    def test_frequency_needs_positive_splitting(self):
        with pytest.raises(ValueError):
            config("frequency", frequency_splitting=0.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            config("postselection")

    def test_node_ranges_enforced(self):
        with pytest.raises(ValueError):
            NodeParams(excitation_probability=1.5)
        with pytest.raises(ValueError):
            NodeParams(excitation_probability=0.5, solid_angle_fraction=0.6)

    def test_epsilon_product(self):
        n = NodeParams(excitation_probability=1.0, solid_angle_fraction=0.1,
                       transmission=0.5, detector_efficiency=0.68)
        assert n.detection_probability == pytest.approx(0.034, abs=1e-12)


class TestAnalytics:
    def test_analytic_herald_prob_examples(self):
        assert analytic_herald_prob(config("number", p_e=0.05, eps=0.01)) \
            == pytest.approx(1.0e-3, rel=1e-12)
        cfg = config("time-bin", p_e=1.0, gamma=0.94, eps=0.02)
        assert analytic_herald_prob(cfg) == pytest.approx(0.5 * 0.0188 ** 2,
                                                          rel=1e-9)
        assert analytic_herald_prob(config("polarization", p_e=0.0)) == 0.0

    def test_rate_ratio_examples(self):
        assert rate_ratio_number_vs_two_photon(0.05, 0.01) == pytest.approx(20.0)
        assert rate_ratio_number_vs_two_photon(0.0025, 0.01) == pytest.approx(1.0)
        assert rate_ratio_number_vs_two_photon(0.05, 0.01, branching=0.5) \
            == pytest.approx(40.0)
        with pytest.raises(ValueError):
            rate_ratio_number_vs_two_photon(0.05, 0.0)

    def test_rate_ratio_matches_engine(self):
        p_e, eps = 0.05, 0.01
        number = run_protocol(config("number", p_e=p_e, eps=eps)).total_success
        two_photon = run_protocol(config("time-bin", p_e=1.0, eps=eps)).total_success
        engine_ratio = number / two_photon
        assert engine_ratio == pytest.approx(
            rate_ratio_number_vs_two_photon(p_e, eps), rel=0.05)

    def test_balance_excitation(self):
        assert balance_excitation(0.05, 0.01, 0.005) == pytest.approx(0.10)
        assert balance_excitation(0.3, 0.02, 0.02) == pytest.approx(0.3)
        with pytest.raises(ValueError):
            balance_excitation(0.5, 0.02, 0.005)

    def test_balancing_restores_fidelity(self):
        p_e1, eps1 = 0.01, 0.02
        for ratio in (2.0, 4.0):
            eps2 = eps1 / ratio
            p_e2 = balance_excitation(p_e1, eps1, eps2)
            cfg = ProtocolConfig(kind="number", node0=node(p_e1, eps=eps1),
                                 node1=node(p_e2, eps=eps2))
            compensated = run_protocol(cfg).mean_fidelity()
            p_mean = 0.5 * (p_e1 + p_e2)
            eps_mean = math.sqrt(eps1 * eps2)
            reference = run_protocol(config("number", p_e=p_mean,
                                            eps=eps_mean)).mean_fidelity()
            assert abs(compensated - reference) <= 1e-3

    def test_unbalanced_losses_hurt(self):
        cfg = ProtocolConfig(kind="number", node0=node(0.01, eps=0.02),
                             node1=node(0.01, eps=0.005))
        degraded = run_protocol(cfg).mean_fidelity()
        balanced = run_protocol(config("number", p_e=0.01,
                                       eps=0.02)).mean_fidelity()
        assert balanced - degraded > 0.05


class TestPropagationPhases:
    def test_half_wavelength_offset_flips_number_herald(self):
        cfg = config("number", p_e=1e-6)
        shifted = replace(cfg, node0=replace(cfg.node0,
                                             path_offset=cfg.wavelength / 2.0))
        table = run_protocol(shifted)
        entry = table.entry(("D0",))
        # relative phase k dl = pi turns the D0 herald from psi- into psi+
        assert entry.fidelity == pytest.approx(0.0, abs=1e-9)
        from pmesim.fock import bell_fidelity
        assert bell_fidelity(entry.ion_state, "psi_plus") == pytest.approx(
            1.0, abs=1e-9)

    def test_quarter_phase_costs_half_the_coherence(self):
        cfg = config("number", p_e=1e-6)
        shifted = replace(cfg, node0=replace(cfg.node0,
                                             path_offset=cfg.wavelength / 4.0))
        entry = run_protocol(shifted).entry(("D0",))
        assert entry.fidelity == pytest.approx(0.5, abs=1e-9)

    def test_qubit_splitting_phase_on_late_bin(self):
        # a pi phase from the ion-to-ion qubit frequency offset over the bin
        # separation swaps the time-bin herald parity
        cfg = config("time-bin")
        offset = 0.5 / cfg.bin_separation  # 2 pi dnu dt = pi
        shifted = replace(cfg, node0=replace(cfg.node0,
                                             qubit_frequency_offset=offset))
        table = run_protocol(shifted)
        same_port = table.entry(("D0@early", "D0@late"))
        assert same_port.fidelity == pytest.approx(0.0, abs=1e-9)
        from pmesim.fock import bell_fidelity
        assert bell_fidelity(same_port.ion_state, "psi_minus") == pytest.approx(
            1.0, abs=1e-9)

    def test_common_path_offset_cancels_for_time_bin(self):
        cfg = config("time-bin")
        shifted = replace(cfg, node0=replace(cfg.node0, path_offset=0.02))
        # two centimeters of path difference: the optical k cancels between
        # the bins and only dk * dl = 2 pi dnu dl / c survives
        table = run_protocol(shifted)
        penalty = 1.0 - table.mean_fidelity()
        expected = (1.0 - math.cos(2.0 * math.pi * cfg.frequency_splitting
                                   * 0.02 / 2.99792458e8)) / 2.0
        assert penalty == pytest.approx(expected, abs=1e-6)


class TestPhaseJitter:
    def test_zero_jitter_is_ideal(self):
        cfg = config("number", p_e=0.01)
        assert phase_jitter_fidelity(cfg, 0.0) == pytest.approx(
            run_protocol(cfg).mean_fidelity(), abs=1e-12)

    def test_wavelength_scale_jitter_randomizes_number_protocol(self):
        cfg = config("number", p_e=1e-3)
        fidelity = phase_jitter_fidelity(cfg, 10 * cfg.wavelength,
                                         n_samples=2000, seed=7)
        assert fidelity == pytest.approx(0.5, abs=0.02)

    def test_time_bin_is_insensitive_to_wavelength_scale_jitter(self):
        cfg = config("time-bin", frequency_splitting=10e9)
        fidelity = phase_jitter_fidelity(cfg, 10 * cfg.wavelength,
                                         n_samples=400, seed=7)
        assert 1.0 - fidelity <= 1e-6

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            phase_jitter_fidelity(config("number"), -1.0)


class TestSplitterImbalance:
    def test_balanced_analyzer_is_exact(self):
        cfg = config("polarization", enhanced_analyzer=True)
        assert splitter_imbalance_infidelity(cfg, 0.5) <= 1e-10

    def test_quadratic_scaling(self):
        cfg = config("polarization", enhanced_analyzer=True)
        small = splitter_imbalance_infidelity(cfg, 0.51)
        assert small <= 4e-4
        ratio_small = splitter_imbalance_infidelity(cfg, 0.52) / small
        assert ratio_small == pytest.approx(4.0, rel=0.10)
        ratio_large = (splitter_imbalance_infidelity(cfg, 0.60)
                       / splitter_imbalance_infidelity(cfg, 0.55))
        assert ratio_large == pytest.approx(4.0, rel=0.10)


class TestSpeciesPresets:
    def test_table_matches_bundled_values(self):
        expected = {
            "Ca+": (397.0, 393.0, {43: 3.2}),
            "Sr+": (422.0, 408.0, {87: 5.0}),
            "Ba+": (493.0, 455.0, {133: 9.9, 137: 8.0}),
            "Yb+": (369.0, 329.0, {171: 12.6, 173: 10.5}),
        }
        assert {s.name for s in SPECIES} == set(expected)
        for preset in SPECIES:
            p12, p32, hyperfine = expected[preset.name]
            assert preset.p_half_nm == p12
            assert preset.p_three_half_nm == p32
            assert dict(preset.hyperfine_ghz) == hyperfine

    def test_lookup_and_units(self):
        barium = species("Ba+")
        assert barium.wavelength_m() == pytest.approx(493e-9)
        assert barium.wavelength_m("p_three_half") == pytest.approx(455e-9)
        with pytest.raises(ValueError):
            species("Na+")

    def test_detector_presets(self):
        assert DETECTOR_EFFICIENCY["snspd"] == 0.68
        assert DETECTOR_EFFICIENCY["spad"] == 0.40
