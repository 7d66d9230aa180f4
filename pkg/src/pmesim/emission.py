"""Dipole emission patterns, aperture-weighted collection, and wavepacket overlap.

Angular intensities are the classical dipole patterns, normalized to one
over the full sphere:

    pi (linear dipole):      (3 / 8 pi) sin^2(theta)
    sigma (rotating dipole): (3 / 16 pi) (1 + cos^2(theta))

with theta measured from the quantization axis (by convention in the chip
plane, along the across-gap y axis).  Collection integrates the raw angular
intensity over the aperture; overlap of the collected field with the
guided TE0 mode is not modeled, so the factor-two collection advantage of
the pi pattern over sigma is exact only in the small-aperture (on-axis)
limit.  Symmetry-suppressed TE-to-TE cross-talk between the two collection
gratings is taken to be exactly zero; residual TM pickup is the scalar
leakage knob threaded through to the protocol simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .protocols import ProtocolConfig, run_protocol
from .tolerances import QUADRATURE_RTOL
from .trap import ApertureSpec


@dataclass(frozen=True)
class DipoleTransition:
    """pi or sigma transition (sigma+ and sigma- share the pattern)."""

    kind: str
    quantization_axis: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("pi", "sigma"):
            raise ValueError("transition kind must be 'pi' or 'sigma'")
        axis = np.asarray(self.quantization_axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise ValueError("quantization axis must be a nonzero vector")
        object.__setattr__(self, "quantization_axis",
                           tuple(float(v) for v in axis / norm))

    def axis(self) -> np.ndarray:
        return np.asarray(self.quantization_axis)


def dipole_intensity(transition: DipoleTransition, direction) -> float:
    """Emission probability per steradian in a given unit direction."""
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValueError("direction must be a nonzero vector")
    cos_theta = float(np.dot(d / norm, transition.axis()))
    if transition.kind == "pi":
        return (3.0 / (8.0 * math.pi)) * (1.0 - cos_theta ** 2)
    return (3.0 / (16.0 * math.pi)) * (1.0 + cos_theta ** 2)


@dataclass(frozen=True)
class CollectionChannel:
    """A transition collected through an aperture with a branching weight.

    `aperture=None` means the full sphere (normalization checks)."""

    transition: DipoleTransition
    aperture: ApertureSpec | None
    branching_weight: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.branching_weight <= 1.0:
            raise ValueError("branching weight must lie in [0, 1]")


def _aperture_integral(transition: DipoleTransition, aperture: ApertureSpec) -> float:
    """Integral of the angular intensity over the aperture's solid angle.

    Parametrized by the landing point (x, y) on the plane at distance h
    below the ion; dOmega = h dA / r^3.
    """
    h = aperture.height
    half_l = aperture.length / 2.0
    half_a = aperture.width / 2.0
    if half_l == 0.0 or half_a == 0.0:
        return 0.0
    axis = transition.axis()
    kind = transition.kind

    def integrand(y, x):
        r2 = x * x + y * y + h * h
        r = math.sqrt(r2)
        cos_theta = (x * axis[0] + y * axis[1] - h * axis[2]) / r
        if kind == "pi":
            intensity = (3.0 / (8.0 * math.pi)) * (1.0 - cos_theta ** 2)
        else:
            intensity = (3.0 / (16.0 * math.pi)) * (1.0 + cos_theta ** 2)
        return intensity * h / (r2 * r)

    # cut at a generous multiple of h: the integrand decays like r^-3
    cap = 2e4 * h
    half_l = min(half_l, cap)
    half_a = min(half_a, cap)
    value, _ = integrate.dblquad(integrand, -half_l, half_l, -half_a, half_a,
                                 epsabs=1e-12, epsrel=QUADRATURE_RTOL * 1e-2)
    return value


def sphere_integral(transition: DipoleTransition) -> float:
    """Full 4pi integral of the angular intensity (should be one)."""
    axis = transition.axis()
    kind = transition.kind

    def integrand(phi, theta):
        d = (math.sin(theta) * math.cos(phi),
             math.sin(theta) * math.sin(phi),
             math.cos(theta))
        cos_t = d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2]
        if kind == "pi":
            intensity = (3.0 / (8.0 * math.pi)) * (1.0 - cos_t ** 2)
        else:
            intensity = (3.0 / (16.0 * math.pi)) * (1.0 + cos_t ** 2)
        return intensity * math.sin(theta)

    value, _ = integrate.dblquad(integrand, 0.0, math.pi, 0.0, 2.0 * math.pi,
                                 epsabs=1e-12, epsrel=1e-10)
    return value


def collected_fraction(channel: CollectionChannel) -> float:
    """Probability that an emitted photon lands inside the aperture."""
    if channel.aperture is None:
        return sphere_integral(channel.transition)
    return _aperture_integral(channel.transition, channel.aperture)


def channel_balance(pi_weight: float = 1.0 / 3.0, sigma_weight: float = 2.0 / 3.0,
                    aperture: ApertureSpec | None = None) -> tuple[float, float]:
    """Per-waveguide photon probabilities: branching x collected fraction.

    The sigma transition is twice as likely (Clebsch-Gordan weights 2/3 vs
    1/3 for a J=1/2 to J=1/2 decay) while the pi pattern is twice as
    directed toward a small aperture below the ion, so the two channel
    probabilities are nearly equal for compact centered apertures.
    """
    if abs(pi_weight + sigma_weight - 1.0) > 1e-12:
        raise ValueError("branching weights must sum to one")
    if aperture is None:
        raise ValueError("channel_balance requires an aperture")
    p_pi = pi_weight * collected_fraction(
        CollectionChannel(DipoleTransition("pi"), aperture, pi_weight))
    p_sigma = sigma_weight * collected_fraction(
        CollectionChannel(DipoleTransition("sigma"), aperture, sigma_weight))
    return p_pi, p_sigma


def crosstalk_infidelity(config: ProtocolConfig, chi_db: float) -> float:
    """Dominant-herald infidelity with cross-channel leakage of chi_db (power).

    chi_db <= 0 is the power cross-talk in dB: chi^2 = 10^(chi_db / 10).
    """
    if chi_db > 0.0:
        raise ValueError("cross-talk must be given as a nonpositive dB value")
    if math.isinf(chi_db):
        chi = 0.0
    else:
        chi = 10.0 ** (chi_db / 20.0)
    table = run_protocol(replace(config, crosstalk=chi))
    return 1.0 - table.dominant_herald().fidelity


def temporal_overlap(delta_t: float, lifetime: float) -> float:
    """Squared overlap of two exponential wavepackets offset by delta_t.

    M = exp(-|delta_t| / tau); multiplicative in the offset, which makes it a
    convenient scalar input for the protocols' mode-overlap parameter.
    """
    if lifetime <= 0.0:
        raise ValueError("lifetime must be positive")
    return math.exp(-abs(delta_t) / lifetime)
