"""Five-wire surface-trap geometry: ion height, grating exposure, trap strength.

The trap is modeled in the gapless-plane approximation: two infinitely long
RF strips of width b separated by a gap a, embedded in a grounded plane,
with the collection aperture (a grating of length l) occupying the gap.
Lengths are in micrometers unless noted otherwise.

The RF null sits at height h = sqrt(a (a + 2 b)) / 2 above the plane.  The
grating sees the ion through a centered rectangular aperture of dimensions
l x a at distance h; its fractional solid-angle exposure has the standard
closed pyramid form, cross-checked here by a Monte-Carlo direction-sampling
estimator.  Trap strength is the radial secular frequency obtained from the
curvature of the pseudopotential q^2 |E|^2 / (4 m Omega_rf^2) at the null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar


def ion_height(gap: float, rf_width: float) -> float:
    """RF-null height of a five-wire trap: h = sqrt(a (a + 2 b)) / 2."""
    if gap <= 0.0 or rf_width < 0.0:
        raise ValueError("gap must be positive and RF width nonnegative")
    return math.sqrt(gap * (gap + 2.0 * rf_width)) / 2.0


def rf_gap_for_height(height: float, rf_width: float) -> float:
    """Gap producing a given ion height: a = sqrt(b^2 + 4 h^2) - b."""
    if height <= 0.0 or rf_width < 0.0:
        raise ValueError("height must be positive and RF width nonnegative")
    return math.sqrt(rf_width ** 2 + 4.0 * height ** 2) - rf_width


def rf_width_for_gap(gap: float, height: float) -> float:
    """RF electrode width preserving a fixed ion height: b = (4h^2 - a^2) / 2a."""
    if not 0.0 < gap < 2.0 * height:
        raise ValueError("gap must lie in (0, 2 h) for a trap at height h")
    return (4.0 * height ** 2 - gap ** 2) / (2.0 * gap)


@dataclass(frozen=True)
class ApertureSpec:
    """Centered rectangular aperture below the ion: l along the trap axis,
    a across the RF gap, ion at height h above the plane (micrometers)."""

    length: float
    width: float
    height: float
    centered: bool = True

    def __post_init__(self):
        if self.length < 0.0 or self.width < 0.0 or self.height <= 0.0:
            raise ValueError("aperture needs nonnegative extents and positive height")
        if not self.centered:
            raise ValueError("only centered apertures are supported")


def solid_angle_fraction(aperture: ApertureSpec) -> float:
    """Fraction of the full sphere subtended by the aperture rectangle.

    Omega = 4 arctan(alpha beta / (h sqrt(alpha^2 + beta^2 + h^2))) with
    alpha = l/2, beta = a/2.  Infinite extents are taken as analytic limits
    rather than large-number proxies.
    """
    alpha = aperture.length / 2.0
    beta = aperture.width / 2.0
    h = aperture.height
    if alpha == 0.0 or beta == 0.0:
        return 0.0
    if math.isinf(alpha) and math.isinf(beta):
        omega = 2.0 * math.pi
    elif math.isinf(alpha):
        omega = 4.0 * math.atan(beta / h)
    elif math.isinf(beta):
        omega = 4.0 * math.atan(alpha / h)
    else:
        omega = 4.0 * math.atan(alpha * beta
                                / (h * math.sqrt(alpha ** 2 + beta ** 2 + h ** 2)))
    return omega / (4.0 * math.pi)


def solid_angle_monte_carlo(aperture: ApertureSpec, n_samples: int,
                            seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of the exposure fraction and its standard error.

    Samples directions uniformly over the lower hemisphere and counts plane
    intersections inside the rectangle.  Serves as an independent check of
    the closed form.
    """
    n_samples = int(n_samples)
    if n_samples < 10_000:
        raise ValueError("use at least 1e4 samples for a meaningful estimate")
    if aperture.length == 0.0 or aperture.width == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    cos_down = rng.uniform(0.0, 1.0, n_samples)   # |cos| toward the plane
    cos_down = np.maximum(cos_down, 1e-300)       # grazing rays never land
    azimuth = rng.uniform(0.0, 2.0 * math.pi, n_samples)
    sin_polar = np.sqrt(1.0 - cos_down ** 2)
    scale = aperture.height / cos_down
    px = sin_polar * np.cos(azimuth) * scale
    py = sin_polar * np.sin(azimuth) * scale
    hits = (np.abs(px) <= aperture.length / 2.0) & (np.abs(py) <= aperture.width / 2.0)
    p_hat = float(np.mean(hits))
    estimate = 0.5 * p_hat
    std_error = 0.5 * math.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / n_samples)
    return estimate, std_error


def strip_potential(x1: float, x2: float, voltage: float, x, y):
    """Free-space potential of a biased strip [x1, x2] in a grounded plane."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise ValueError("the potential is defined for y > 0 only")
    return (voltage / math.pi) * (np.arctan((x2 - x) / y) - np.arctan((x1 - x) / y))


def strip_field(x1: float, x2: float, voltage: float, x, y):
    """Electric field (Ex, Ey) = -grad of the strip potential, analytic."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise ValueError("the field is defined for y > 0 only")
    d2_right = (x2 - x) ** 2 + y ** 2
    d2_left = (x1 - x) ** 2 + y ** 2
    ex = (voltage / math.pi) * (y / d2_right - y / d2_left)
    ey = (voltage / math.pi) * ((x2 - x) / d2_right - (x1 - x) / d2_left)
    return ex, ey


class TradeoffTable(NamedTuple):
    gap: np.ndarray
    rf_width: np.ndarray
    radial_frequency_normalized: np.ndarray
    exposure_fraction: np.ndarray


@dataclass(frozen=True)
class TrapGeometry:
    """Five-wire trap: RF strips of width `rf_width` at gap `gap` (um),
    driven at `voltage` volts and `drive_frequency` rad/s, for an ion with
    charge-to-mass ratio `charge_to_mass` C/kg."""

    gap: float
    rf_width: float
    voltage: float = 50.0
    drive_frequency: float = 2.0 * math.pi * 50e6
    charge_to_mass: float = 7.0e5      # roughly Ba-138
    grating_length: float = 100.0

    def __post_init__(self):
        if min(self.gap, self.rf_width, self.grating_length) <= 0.0:
            raise ValueError("gap, RF width and grating length must be positive")
        if self.voltage <= 0.0 or self.drive_frequency <= 0.0:
            raise ValueError("voltage and drive frequency must be positive")
        if self.gap >= 2.0 * self.height:
            raise ValueError("trapping requires gap < 2 h (finite RF electrodes)")

    @property
    def height(self) -> float:
        return ion_height(self.gap, self.rf_width)

    @property
    def strips(self):
        half = self.gap / 2.0
        return ((half, half + self.rf_width),
                (-half - self.rf_width, -half))

    def field(self, x, y):
        """Total RF electric field (V/um when positions are in um)."""
        ex_total, ey_total = 0.0, 0.0
        for x1, x2 in self.strips:
            ex, ey = strip_field(x1, x2, self.voltage, x, y)
            ex_total = ex_total + ex
            ey_total = ey_total + ey
        return ex_total, ey_total

    def pseudopotential_per_mass(self, x, y):
        """Psi/m = (q/m)^2 |E|^2 / (4 Omega_rf^2), SI (positions in um)."""
        ex, ey = self.field(x, y)
        e2 = (np.asarray(ex) * 1e6) ** 2 + (np.asarray(ey) * 1e6) ** 2  # (V/m)^2
        return (self.charge_to_mass ** 2) * e2 / (4.0 * self.drive_frequency ** 2)

    def aperture(self, length: float | None = None) -> ApertureSpec:
        return ApertureSpec(length=self.grating_length if length is None else length,
                            width=self.gap, height=self.height)


def rf_null_height(geometry: TrapGeometry) -> float:
    """Locate the field null on the symmetry axis numerically."""
    h_ref = geometry.height

    def ey_on_axis(y):
        return geometry.field(0.0, y)[1]

    lo, hi = 0.2 * h_ref, 5.0 * h_ref
    if ey_on_axis(lo) * ey_on_axis(hi) > 0.0:
        raise ValueError("no RF null found on the symmetry axis")
    return brentq(ey_on_axis, lo, hi, xtol=1e-12 * h_ref, rtol=8.9e-16)


def radial_frequency(geometry: TrapGeometry, step_fraction: float = 1e-3) -> float:
    """Radial secular frequency (rad/s) from the pseudopotential curvature.

    Central differences with step h/1000 around the numerically located
    null; halving the step moves the result by well under 0.1%.
    """
    y0 = rf_null_height(geometry)
    d = y0 * step_fraction

    def u(x, y):
        return float(geometry.pseudopotential_per_mass(x, y))

    u0 = u(0.0, y0)
    uxx = (u(d, y0) - 2.0 * u0 + u(-d, y0)) / d ** 2
    uyy = (u(0.0, y0 + d) - 2.0 * u0 + u(0.0, y0 - d)) / d ** 2
    uxy = (u(d, y0 + d) - u(d, y0 - d) - u(-d, y0 + d) + u(-d, y0 - d)) / (4.0 * d ** 2)
    hessian = np.array([[uxx, uxy], [uxy, uyy]]) * 1e12  # per um^2 -> per m^2
    eigenvalues = np.linalg.eigvalsh(hessian)
    if eigenvalues.max() <= 0.0:
        raise ValueError("negative curvature at the null: not a trap")
    return math.sqrt(eigenvalues.max())


def exposure_strength_tradeoff(height: float, grating_length: float,
                               gap_grid, voltage: float = 50.0,
                               drive_frequency: float = 2.0 * math.pi * 50e6,
                               charge_to_mass: float = 7.0e5) -> TradeoffTable:
    """Normalized trap strength and grating exposure along the fixed-height curve.

    For every gap a in the grid the RF width is set to b = (4h^2 - a^2)/2a so
    the ion height stays fixed; exposure rises with a while the radial
    frequency peaks in the interior and falls to zero as a -> 2h.
    """
    gaps = np.asarray(gap_grid, dtype=float)
    if np.any(gaps <= 0.0) or np.any(gaps >= 2.0 * height):
        raise ValueError("gap grid must lie inside (0, 2 h)")
    widths = np.array([rf_width_for_gap(a, height) for a in gaps])
    omegas = np.empty_like(gaps)
    exposures = np.empty_like(gaps)
    for i, (a, b) in enumerate(zip(gaps, widths)):
        geometry = TrapGeometry(gap=a, rf_width=b, voltage=voltage,
                                drive_frequency=drive_frequency,
                                charge_to_mass=charge_to_mass,
                                grating_length=grating_length)
        omegas[i] = radial_frequency(geometry)
        exposures[i] = solid_angle_fraction(geometry.aperture())
    return TradeoffTable(gaps, widths, omegas / omegas.max(), exposures)


def optimal_gap(height: float, gap_bounds: tuple[float, float] = (5.0, 99.0),
                coarse_points: int = 95, **trap_kwargs) -> float:
    """Gap maximizing the radial frequency on the fixed-height constraint curve."""

    def omega(a):
        b = rf_width_for_gap(a, height)
        return radial_frequency(TrapGeometry(gap=a, rf_width=b, **trap_kwargs))

    grid = np.linspace(gap_bounds[0], gap_bounds[1], coarse_points)
    values = [omega(a) for a in grid]
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    result = minimize_scalar(lambda a: -omega(a), bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-4})
    return float(result.x)
