"""Design a focusing chirped grating and check it against lithography limits.

Places every tooth so the guided-plus-free-space optical path to the ion is a
constant plus an integer number of wavelengths, then reads off local pitch
and emission angle per tooth and flags anything below the 240 nm floor.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from pmesim.grating import (
    GratingSpec,
    fabrication_lint,
    pitch_for_angle,
    tooth_positions,
    write_tooth_csv,
)

spec = GratingSpec(wavelength_nm=493.0, effective_index=1.6,
                   ion_x_um=0.0, ion_distance_um=50.0,
                   span_um=(-37.5, 37.5), min_pitch_nm=240.0)

guided = spec.wavelength_nm / spec.effective_index
print(f"guided wavelength: {guided:.1f} nm "
      f"(= first-order pitch for normal emission)")
for angle_deg in (30.0, 0.0, -30.0):
    import math
    pitch = pitch_for_angle(spec, math.radians(angle_deg))
    marker = "  <- below floor" if pitch < spec.min_pitch_nm else ""
    print(f"pitch at {angle_deg:+5.1f} deg: {pitch:6.1f} nm{marker}")

teeth = tooth_positions(spec)
violations = fabrication_lint(teeth, spec.min_pitch_nm)
print(f"\n{len(teeth)} teeth across {spec.span_um} um; "
      f"{len(violations)} below the {spec.min_pitch_nm:.0f} nm floor "
      f"(all on the backward-emitting end)")
print(f"worst constant-path residual: "
      f"{max(t.residual_um for t in teeth):.2e} um")

write_tooth_csv("chirped_teeth.csv", teeth)
print("wrote chirped_teeth.csv")

fig, ax = plt.subplots(figsize=(5, 3.2))
xs = [t.x_um for t in teeth[:-1]]
pitches = [t.pitch_nm for t in teeth[:-1]]
ax.plot(xs, pitches, ".", ms=3)
ax.axhline(spec.min_pitch_nm, color="r", lw=0.8, label="fabrication floor")
ax.axhline(guided, color="gray", lw=0.8, ls="--", label="normal emission")
ax.axvline(spec.ion_x_um, color="gray", lw=0.5)
ax.set_xlabel("tooth position (um)")
ax.set_ylabel("local pitch (nm)")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("chirp_profile.png", dpi=150)
print("wrote chirp_profile.png")
