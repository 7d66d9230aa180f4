"""Geometry walk-through: where the ion sits and how much light the grating sees.

A five-wire surface trap holds the ion at h = sqrt(a(a+2b))/2 above the chip.
Widening the RF gap exposes more of the emitted light to a grating placed in
the gap, but starves the trap of curvature; this script reproduces both sides
of that trade-off and saves the two curves as PNGs.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pmesim.trap import (
    ApertureSpec,
    exposure_strength_tradeoff,
    ion_height,
    optimal_gap,
    rf_width_for_gap,
    solid_angle_fraction,
    solid_angle_monte_carlo,
)

GAP, WIDTH = 62.0, 50.0  # um, the compromise geometry used throughout
HEIGHT = ion_height(GAP, WIDTH)

print(f"ion height for a={GAP} um, b={WIDTH} um: h = {HEIGHT:.2f} um")

# --- exposure vs grating length at fixed electrodes --------------------------
lengths = np.linspace(5.0, 150.0, 59)
exposure = [solid_angle_fraction(ApertureSpec(l, GAP, HEIGHT)) for l in lengths]
at_100 = solid_angle_fraction(ApertureSpec(100.0, GAP, HEIGHT))
print(f"exposure fraction at l = 100 um: {at_100:.4f}")

mc, err = solid_angle_monte_carlo(ApertureSpec(100.0, GAP, HEIGHT), 500_000, seed=1)
print(f"Monte-Carlo cross-check: {mc:.4f} +/- {err:.4f}")

fig, ax = plt.subplots(figsize=(5, 3.2))
ax.plot(lengths, exposure, "b:", lw=2, label="solid-angle fraction")
ax.axhline(0.25, color="gray", lw=0.8, ls="--", label="infinite-strip bound (a=2h)")
ax.set_xlabel("grating length l (um)")
ax.set_ylabel("exposure fraction")
ax.legend(loc="lower right", fontsize=8)
fig.tight_layout()
fig.savefig("exposure_vs_length.png", dpi=150)
print("wrote exposure_vs_length.png")

# --- strength vs exposure along the fixed-height constraint curve ------------
gaps = np.linspace(8.0, 98.0, 46)
table = exposure_strength_tradeoff(HEIGHT, 100.0, gaps)
best = optimal_gap(HEIGHT)
print(f"strength-optimal gap at fixed h = {HEIGHT:.1f} um: "
      f"a = {best:.1f} um (b = {rf_width_for_gap(best, HEIGHT):.0f} um)")
print(f"exposure of an infinitely long slot at that gap: "
      f"{solid_angle_fraction(ApertureSpec(np.inf, best, HEIGHT)):.4f}")

fig, ax = plt.subplots(figsize=(5, 3.2))
ax.plot(table.gap, table.radial_frequency_normalized, "r-", label="trap strength")
ax.plot(table.gap, table.exposure_fraction / table.exposure_fraction.max(),
        "b--", label="exposure (normalized)")
ax.axvline(best, color="gray", lw=0.8)
ax.set_xlabel("RF gap a (um)")
ax.set_ylabel("normalized")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("strength_vs_exposure.png", dpi=150)
print("wrote strength_vs_exposure.png")
