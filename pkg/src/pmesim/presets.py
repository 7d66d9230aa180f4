"""Bundled data tables: ion species transition wavelengths and detector efficiencies.

SPECIES_TABLE_VERSION identifies the revision of the species data so that
downstream golden files can pin it.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

SPECIES_TABLE_VERSION = "2024.1"


@dataclass(frozen=True)
class SpeciesPreset:
    """One ion species: S1/2 -> P1/2 and S1/2 -> P3/2 wavelengths in nm,
    plus ground-state hyperfine splittings (GHz) per isotope where applicable."""

    name: str
    p_half_nm: float
    p_three_half_nm: float
    hyperfine_ghz: MappingProxyType  # isotope mass number -> splitting (GHz)

    def wavelength_m(self, transition: str = "p_half") -> float:
        nm = self.p_half_nm if transition == "p_half" else self.p_three_half_nm
        return nm * 1e-9


def _species(name, p12, p32, hyperfine):
    return SpeciesPreset(name, p12, p32, MappingProxyType(dict(hyperfine)))


SPECIES = (
    _species("Ca+", 397.0, 393.0, {43: 3.2}),
    _species("Sr+", 422.0, 408.0, {87: 5.0}),
    _species("Ba+", 493.0, 455.0, {133: 9.9, 137: 8.0}),
    _species("Yb+", 369.0, 329.0, {171: 12.6, 173: 10.5}),
)

_BY_NAME = {s.name: s for s in SPECIES}


def species(name: str) -> SpeciesPreset:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown species {name!r}; known: {sorted(_BY_NAME)}") from None


# Demonstrated trap-integrated single-photon detector efficiencies.
DETECTOR_EFFICIENCY = MappingProxyType({
    "snspd": 0.68,  # superconducting nanowire, cryogenic
    "spad": 0.40,   # avalanche diode, room temperature
})
