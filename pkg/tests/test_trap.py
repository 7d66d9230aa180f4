"""Trap-geometry tests: heights, solid angles, fields, and the strength optimum."""

import math

import numpy as np
import pytest

from pmesim.trap import (
    ApertureSpec,
    TrapGeometry,
    exposure_strength_tradeoff,
    ion_height,
    optimal_gap,
    radial_frequency,
    rf_gap_for_height,
    rf_null_height,
    rf_width_for_gap,
    solid_angle_fraction,
    solid_angle_monte_carlo,
    strip_field,
    strip_potential,
)


class TestHeightGapRelations:
    def test_height_from_quoted_geometry(self):
        assert ion_height(61.80, 50.0) == pytest.approx(50.0, abs=0.05)

    def test_height_from_wide_electrodes(self):
        assert ion_height(41.0, 100.0) == pytest.approx(49.7, abs=0.1)

    def test_degenerate_width_limit(self):
        assert ion_height(100.0, 0.0) == pytest.approx(50.0, abs=1e-12)

    def test_gap_for_height_quoted_geometry(self):
        assert rf_gap_for_height(50.0, 50.0) == pytest.approx(61.80, abs=0.01)

    def test_gap_vanishes_for_wide_electrodes(self):
        assert rf_gap_for_height(50.0, 1e7) == pytest.approx(0.0, abs=1e-3)

    def test_gap_for_wide_electrode_case(self):
        assert rf_gap_for_height(50.0, 100.0) == pytest.approx(41.4, abs=0.1)

    @pytest.mark.parametrize("seed", range(10))
    def test_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        height = rng.uniform(20.0, 120.0)
        width = rng.uniform(5.0, 200.0)
        gap = rf_gap_for_height(height, width)
        assert ion_height(gap, width) == pytest.approx(height, rel=1e-9)

    def test_nonpositive_inputs_rejected(self):
        with pytest.raises(ValueError):
            ion_height(0.0, 10.0)
        with pytest.raises(ValueError):
            rf_gap_for_height(-1.0, 10.0)


class TestSolidAngle:
    def test_paper_geometry_exposure(self):
        ap = ApertureSpec(length=100.0, width=62.0, height=50.0)
        assert solid_angle_fraction(ap) == pytest.approx(0.122, abs=0.001)

    def test_infinite_strip_upper_bound(self):
        ap = ApertureSpec(length=math.inf, width=100.0, height=50.0)
        assert solid_angle_fraction(ap) == pytest.approx(0.25, abs=1e-12)

    def test_half_space_limit(self):
        ap = ApertureSpec(length=math.inf, width=math.inf, height=50.0)
        assert solid_angle_fraction(ap) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_aperture(self):
        assert solid_angle_fraction(ApertureSpec(0.0, 62.0, 50.0)) == 0.0

    def test_monotonic_in_extents_and_height(self):
        base = solid_angle_fraction(ApertureSpec(80.0, 50.0, 50.0))
        assert solid_angle_fraction(ApertureSpec(90.0, 50.0, 50.0)) > base
        assert solid_angle_fraction(ApertureSpec(80.0, 60.0, 50.0)) > base
        assert solid_angle_fraction(ApertureSpec(80.0, 50.0, 60.0)) < base

    def test_length_width_exchange_symmetry(self):
        a = solid_angle_fraction(ApertureSpec(77.0, 31.0, 42.0))
        b = solid_angle_fraction(ApertureSpec(31.0, 77.0, 42.0))
        assert a == pytest.approx(b, rel=1e-12)


class TestSolidAngleMonteCarlo:
    def test_paper_geometry_within_three_sigma(self):
        ap = ApertureSpec(length=100.0, width=62.0, height=50.0)
        estimate, stderr = solid_angle_monte_carlo(ap, 1_000_000, seed=11)
        assert abs(estimate - solid_angle_fraction(ap)) <= 3.0 * stderr

    def test_half_space_is_exact(self):
        ap = ApertureSpec(length=math.inf, width=math.inf, height=10.0)
        estimate, stderr = solid_angle_monte_carlo(ap, 100_000, seed=3)
        assert estimate == pytest.approx(0.5, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_aperture_is_zero(self):
        estimate, _ = solid_angle_monte_carlo(ApertureSpec(0.0, 10.0, 10.0),
                                              10_000, seed=1)
        assert estimate == 0.0

    def test_sample_floor_enforced(self):
        with pytest.raises(ValueError):
            solid_angle_monte_carlo(ApertureSpec(1.0, 1.0, 1.0), 100, seed=0)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_geometries_within_three_sigma(self, seed):
        rng = np.random.default_rng(1000 + seed)
        ap = ApertureSpec(length=rng.uniform(5.0, 200.0),
                          width=rng.uniform(5.0, 200.0),
                          height=rng.uniform(20.0, 120.0))
        estimate, stderr = solid_angle_monte_carlo(ap, 200_000, seed=seed)
        assert abs(estimate - solid_angle_fraction(ap)) <= 3.0 * stderr


class TestStripField:
    def test_symmetry_above_strip_center(self):
        ex, _ = strip_field(-10.0, 10.0, 30.0, 0.0, 25.0)
        assert abs(float(ex)) <= 1e-14

    def test_far_field_decays(self):
        ex, ey = strip_field(-10.0, 10.0, 30.0, 3.0, 1e7)
        assert math.hypot(float(ex), float(ey)) <= 1e-9

    def test_field_is_minus_gradient_of_potential(self):
        x, y, d = 7.0, 23.0, 1e-6
        ex, ey = strip_field(2.0, 15.0, 30.0, x, y)
        fx = -(strip_potential(2.0, 15.0, 30.0, x + d, y)
               - strip_potential(2.0, 15.0, 30.0, x - d, y)) / (2 * d)
        fy = -(strip_potential(2.0, 15.0, 30.0, x, y + d)
               - strip_potential(2.0, 15.0, 30.0, x, y - d)) / (2 * d)
        assert float(ex) == pytest.approx(fx, rel=1e-8)
        assert float(ey) == pytest.approx(fy, rel=1e-8)

    def test_mirror_strips_null_at_analytic_height(self):
        gap, width, voltage = 62.0, 50.0, 40.0
        height = math.sqrt(gap * (gap + 2.0 * width)) / 2.0
        ex1, ey1 = strip_field(gap / 2, gap / 2 + width, voltage, 0.0, height)
        ex2, ey2 = strip_field(-gap / 2 - width, -gap / 2, voltage, 0.0, height)
        magnitude = math.hypot(float(ex1 + ex2), float(ey1 + ey2))
        assert magnitude <= 1e-9 * voltage / height

    def test_lower_half_plane_rejected(self):
        with pytest.raises(ValueError):
            strip_field(0.0, 1.0, 1.0, 0.0, -1.0)


class TestRadialFrequency:
    def test_null_height_matches_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            height = rng.uniform(30.0, 100.0)
            gap = rng.uniform(0.2, 1.8) * height
            geometry = TrapGeometry(gap=gap, rf_width=rf_width_for_gap(gap, height))
            assert rf_null_height(geometry) == pytest.approx(geometry.height,
                                                             rel=1e-3)

    def test_voltage_linearity(self):
        base = TrapGeometry(gap=62.0, rf_width=50.0, voltage=40.0)
        doubled = TrapGeometry(gap=62.0, rf_width=50.0, voltage=80.0)
        assert radial_frequency(doubled) == pytest.approx(
            2.0 * radial_frequency(base), rel=1e-9)

    def test_step_halving_stability(self):
        geometry = TrapGeometry(gap=62.0, rf_width=50.0)
        coarse = radial_frequency(geometry, step_fraction=1e-3)
        fine = radial_frequency(geometry, step_fraction=5e-4)
        assert abs(fine - coarse) / coarse < 1e-3

    def test_strength_optimum_matches_quoted_geometry(self):
        best = optimal_gap(50.0)
        assert best == pytest.approx(41.0, abs=2.0)
        assert rf_width_for_gap(best, 50.0) == pytest.approx(100.0, abs=5.0)

    def test_strength_vanishes_as_gap_opens(self):
        height = 50.0
        peak = radial_frequency(
            TrapGeometry(gap=41.4, rf_width=rf_width_for_gap(41.4, height)))
        wide = radial_frequency(
            TrapGeometry(gap=99.8, rf_width=rf_width_for_gap(99.8, height)))
        assert wide / peak < 0.01

    def test_single_interior_maximum_on_constraint_curve(self):
        gaps = np.linspace(10.0, 98.0, 45)
        table = exposure_strength_tradeoff(50.0, 100.0, gaps)
        omega = table.radial_frequency_normalized
        increasing = np.flatnonzero(np.diff(omega) > 0)
        # strictly unimodal: all rises happen before all falls
        assert increasing.size > 0
        assert increasing.max() == increasing.size - 1


class TestTradeoffTable:
    def test_paper_compromise_point(self):
        table = exposure_strength_tradeoff(50.0, 100.0, [62.0])
        assert table.exposure_fraction[0] == pytest.approx(0.122, abs=0.001)
        assert table.rf_width[0] == pytest.approx(49.65, abs=0.05)

    def test_strength_optimal_infinite_strip_exposure(self):
        best = optimal_gap(50.0)
        exposure = solid_angle_fraction(
            ApertureSpec(length=math.inf, width=best, height=50.0))
        assert exposure == pytest.approx(0.125, abs=0.003)

    def test_exposure_increases_with_gap(self):
        table = exposure_strength_tradeoff(50.0, 100.0, np.linspace(10, 95, 18))
        assert np.all(np.diff(table.exposure_fraction) > 0)

    def test_small_gap_limits(self):
        table = exposure_strength_tradeoff(50.0, 100.0, [1.0, 41.4])
        assert table.exposure_fraction[0] < 0.01
        assert (table.radial_frequency_normalized[0]
                < 0.05 * table.radial_frequency_normalized[1])

    def test_grid_outside_bounds_rejected(self):
        with pytest.raises(ValueError):
            exposure_strength_tradeoff(50.0, 100.0, [120.0])
