"""Analytic grating-coupler design: pitch solving, chirped tooth placement, linting.

The first-order grating equation relates the local pitch to the emission
angle theta (measured from the surface normal, positive in the guided
propagation direction):

    sin(theta) = n_eff - m lambda0 / pitch   =>   pitch = m lambda0 / (n_eff - sin theta)

Normal emission at first order therefore needs a pitch equal to the guided
wavelength lambda0 / n_eff.  (Half-wavelength pitch figures sometimes quoted
for grating elements correspond to second-order or reflective designs and do
not satisfy the first-order equation used here.)

A focusing chirp places tooth m where the total optical path, guided plus
free-space to the ion, equals a constant plus m wavelengths:

    n_eff(x_m) x_m + sqrt((x_ion - x_m)^2 + H^2) = C + m lambda0

with C fixed by the first tooth of the span.  The left-hand side increases
monotonically in x (its derivative is n_eff - sin theta > 0), so each tooth
is a bracketed scalar root.  Along increasing x the emission angle swings
from forward (pitch above lambda0/n_eff) through normal to backward (pitch
below), which is where fabrication floors bite.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy.optimize import brentq

from .tolerances import CHIRP_RESIDUAL_REL


@dataclass(frozen=True)
class GratingSpec:
    """Chirped-grating design inputs.

    wavelength_nm: free-space wavelength; effective_index: guided effective
    index (or a per-position callback via index_profile); ion at
    (ion_x_um, ion_distance_um) above the grating plane; teeth restricted to
    span_um = (x_min, x_max); min_pitch_nm is the lithography floor.
    """

    wavelength_nm: float
    effective_index: float
    ion_x_um: float
    ion_distance_um: float
    span_um: tuple[float, float]
    min_pitch_nm: float = 240.0
    index_profile: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.wavelength_nm <= 0.0:
            raise ValueError("wavelength must be positive")
        if self.effective_index <= 1.0:
            raise ValueError("effective index must exceed 1")
        if self.ion_distance_um <= 0.0:
            raise ValueError("ion distance must be positive")
        if self.min_pitch_nm <= 0.0:
            raise ValueError("minimum pitch must be positive")
        x_min, x_max = self.span_um
        if not x_min < x_max:
            raise ValueError("span must be nondegenerate (x_min < x_max)")

    def local_index(self, x_um: float) -> float:
        if self.index_profile is None:
            return self.effective_index
        return float(self.index_profile(x_um))


def pitch_for_angle(spec: GratingSpec, angle_rad: float, order: int = 1) -> float:
    """Local pitch (nm) diffracting toward `angle_rad` from normal."""
    if order < 1:
        raise ValueError("diffraction order must be a positive integer")
    if not -math.pi / 2.0 < angle_rad < math.pi / 2.0:
        raise ValueError("emission angle must lie strictly inside (-pi/2, pi/2)")
    denom = spec.effective_index - math.sin(angle_rad)
    if denom <= 0.0:
        raise ValueError("no propagating solution: n_eff - sin(theta) must be "
                         "positive")
    return order * spec.wavelength_nm / denom


@dataclass(frozen=True)
class Tooth:
    index: int
    x_um: float
    pitch_nm: float      # gap to the next tooth; NaN for the last tooth
    angle_deg: float     # emission angle toward the ion, forward positive
    fabricable: bool     # pitch at or above the fabrication floor
    residual_um: float   # constant-path defect at this tooth


def _path_function(spec: GratingSpec) -> Callable[[float], float]:
    ion_x = spec.ion_x_um
    height = spec.ion_distance_um

    def path(x: float) -> float:
        return spec.local_index(x) * x + math.hypot(ion_x - x, height)

    return path


def _emission_angle(spec: GratingSpec, x_um: float) -> float:
    """Signed angle from normal; positive = forward (toward larger x)."""
    return math.atan2(spec.ion_x_um - x_um, spec.ion_distance_um)


def tooth_positions(spec: GratingSpec) -> list[Tooth]:
    """All constant-optical-path tooth positions inside the span.

    Teeth are the roots of path(x) = C + m lambda0 for integer m, with C the
    path value at the start of the span; the local pitch is the spacing to
    the next tooth.
    """
    lam_um = spec.wavelength_nm * 1e-3
    path = _path_function(spec)
    x_min, x_max = spec.span_um
    base = path(x_min)
    m_max = int(math.floor((path(x_max) - base) / lam_um))
    if m_max < 0:
        raise ValueError("no constant-path solutions inside the span")

    xs = []
    lo = x_min
    for m in range(m_max + 1):
        target = base + m * lam_um

        def defect(x, target=target):
            return path(x) - target

        if m == 0:
            root = x_min
        else:
            root = brentq(defect, lo, x_max, xtol=1e-12, rtol=8.9e-16)
        xs.append(root)
        lo = root

    teeth = []
    for i, x in enumerate(xs):
        pitch_nm = (xs[i + 1] - x) * 1e3 if i + 1 < len(xs) else math.nan
        fabricable = not (pitch_nm < spec.min_pitch_nm)  # NaN counts as fine
        residual = abs(path(x) - (base + i * lam_um))
        teeth.append(Tooth(index=i, x_um=x, pitch_nm=pitch_nm,
                           angle_deg=math.degrees(_emission_angle(spec, x)),
                           fabricable=fabricable, residual_um=residual))

    worst = max(t.residual_um for t in teeth)
    if worst > CHIRP_RESIDUAL_REL * lam_um:
        raise ArithmeticError(f"chirp solver residual {worst:.3e} um exceeds "
                              f"tolerance {CHIRP_RESIDUAL_REL * lam_um:.3e} um")
    return teeth


@dataclass(frozen=True)
class PitchViolation:
    tooth_index: int
    x_um: float
    pitch_nm: float
    min_pitch_nm: float


def fabrication_lint(teeth: Sequence[Tooth], min_pitch_nm: float) -> list[PitchViolation]:
    """Adjacent tooth pairs closer than the fabrication floor; empty = fabricable."""
    violations = []
    for tooth in teeth:
        if not math.isnan(tooth.pitch_nm) and tooth.pitch_nm < min_pitch_nm:
            violations.append(PitchViolation(tooth.index, tooth.x_um,
                                             tooth.pitch_nm, min_pitch_nm))
    return violations


def adiabatic_length_scale(loss_ref: float, length_ref: float,
                           loss_target: float) -> float:
    """Adiabatic coupler length for a new design loss: L ~ sqrt(1 / delta).

    L_target = L_ref sqrt(delta_ref / delta_target).
    """
    if not 0.0 < loss_ref < 1.0 or not 0.0 < loss_target < 1.0:
        raise ValueError("design losses must lie in (0, 1)")
    if length_ref <= 0.0:
        raise ValueError("reference length must be positive")
    return length_ref * math.sqrt(loss_ref / loss_target)


TOOTH_CSV_COLUMNS = ("index", "x_um", "pitch_nm", "angle_deg", "fabricable")


def write_tooth_csv(path, teeth: Sequence[Tooth]):
    """Tooth table as CSV with full-precision floats."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TOOTH_CSV_COLUMNS)
        for tooth in teeth:
            writer.writerow([tooth.index, f"{tooth.x_um:.17g}",
                             f"{tooth.pitch_nm:.17g}", f"{tooth.angle_deg:.17g}",
                             int(tooth.fabricable)])
