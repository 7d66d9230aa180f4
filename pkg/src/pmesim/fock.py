"""Exact density-operator engine for two ion qubits and a few photonic modes.

The Hilbert space is (ion qubit) x (ion qubit) x (truncated Fock space over a
set of labeled bosonic modes), with at most two photons in total.  The
protocols treated here emit at most one photon per node per attempt, so the
truncation is exact rather than approximate.  States are dense complex
matrices over a deterministic basis ordering; every operation returns a new
immutable state, so values can be freely shared between threads.

Mode labels carry three coordinates:

* ``node``     which trap node / analyzer port the mode belongs to,
* ``channel``  the photonic variable (path, waveguide spatial mode,
  frequency bin, or time bin),
* ``match``    the internal wavepacket component, used to model partial
  distinguishability: ``MATCHED`` components of different nodes interfere,
  ``ORTHOGONAL`` ones do not.

Linear elements (beamsplitters, phase shifts, coherent cross-talk) act as
exact many-body unitaries built from the single-photon transfer matrix.
Loss is an amplitude-damping channel in Kraus form, and detection is a
non-number-resolving POVM with independent per-photon efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tolerances import (
    DETECTION_COMPLETENESS_ATOL,
    HERMITICITY_ATOL,
    PSD_EIGENVALUE_FLOOR,
    TRACE_ATOL,
)

MAX_TOTAL_PHOTONS = 2

DOWN = 0
UP = 1


class Channel(IntEnum):
    """Photonic channel carried by a waveguide mode."""

    PATH = 0
    TE0 = 1
    TE1 = 2
    FREQ_RED = 3
    FREQ_BLUE = 4
    BIN_EARLY = 5
    BIN_LATE = 6


class Match(IntEnum):
    """Internal wavepacket component for distinguishability modeling."""

    MATCHED = 0
    ORTHOGONAL = 1


@dataclass(frozen=True, order=True)
class ModeLabel:
    """One bosonic mode, totally ordered so basis enumeration is reproducible."""

    node: int
    channel: Channel
    match: Match = Match.MATCHED

    def __repr__(self):
        return f"({self.node},{self.channel.name},{self.match.name[0]})"


class BasisKet:
    """Number ket |ion1, ion2; n_m1, n_m2, ...> with total photon number <= 2.

    Occupations are stored sparsely (only nonzero counts), so a ket is
    meaningful in any state space whose mode set contains its modes.
    """

    __slots__ = ("ion1", "ion2", "occupations")

    def __init__(self, ion1: int, ion2: int,
                 occupations: Mapping[ModeLabel, int] | Iterable = ()):
        if ion1 not in (DOWN, UP) or ion2 not in (DOWN, UP):
            raise ValueError("ion levels must be DOWN (0) or UP (1)")
        items = occupations.items() if isinstance(occupations, Mapping) else occupations
        occ = tuple(sorted((mode, int(count)) for mode, count in items if count))
        total = 0
        for mode, count in occ:
            if not isinstance(mode, ModeLabel):
                raise TypeError(f"occupation key {mode!r} is not a ModeLabel")
            if count < 0 or count > MAX_TOTAL_PHOTONS:
                raise ValueError(f"occupation {count} outside 0..{MAX_TOTAL_PHOTONS}")
            total += count
        if total > MAX_TOTAL_PHOTONS:
            raise ValueError(f"total photon number {total} exceeds {MAX_TOTAL_PHOTONS}")
        object.__setattr__(self, "ion1", ion1)
        object.__setattr__(self, "ion2", ion2)
        object.__setattr__(self, "occupations", occ)

    def __setattr__(self, name, value):
        raise AttributeError("BasisKet is immutable")

    def occupation(self, mode: ModeLabel) -> int:
        for m, n in self.occupations:
            if m == mode:
                return n
        return 0

    def total_photons(self) -> int:
        return sum(n for _, n in self.occupations)

    def modes(self) -> tuple[ModeLabel, ...]:
        return tuple(m for m, _ in self.occupations)

    def replace_occupations(self, updates: Mapping[ModeLabel, int]) -> "BasisKet":
        occ = dict(self.occupations)
        occ.update(updates)
        return BasisKet(self.ion1, self.ion2, occ)

    def __eq__(self, other):
        return (isinstance(other, BasisKet)
                and self.ion1 == other.ion1
                and self.ion2 == other.ion2
                and self.occupations == other.occupations)

    def __hash__(self):
        return hash((self.ion1, self.ion2, self.occupations))

    def __repr__(self):
        arrows = {DOWN: "dn", UP: "up"}
        occ = ",".join(f"{m!r}:{n}" for m, n in self.occupations) or "vac"
        return f"|{arrows[self.ion1]},{arrows[self.ion2]};{occ}>"


_ION_PAIRS = ((DOWN, DOWN), (DOWN, UP), (UP, DOWN), (UP, UP))


@lru_cache(maxsize=None)
def _occupation_vectors(n_modes: int) -> tuple[tuple[int, ...], ...]:
    """All occupation tuples with sum <= MAX_TOTAL_PHOTONS, lexicographic."""
    vectors: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], remaining: int, budget: int):
        if remaining == 0:
            vectors.append(prefix)
            return
        for n in range(budget + 1):
            extend(prefix + (n,), remaining - 1, budget - n)

    extend((), n_modes, MAX_TOTAL_PHOTONS)
    return tuple(vectors)


@lru_cache(maxsize=None)
def _basis(modes: tuple[ModeLabel, ...]):
    """Deterministic basis: ion pairs outermost, photon occupations inner."""
    occs = _occupation_vectors(len(modes))
    kets = tuple(
        BasisKet(i1, i2, zip(modes, occ))
        for (i1, i2) in _ION_PAIRS
        for occ in occs
    )
    index = {ket: i for i, ket in enumerate(kets)}
    return kets, index, len(occs)


class JointState:
    """Density operator over (ion1, ion2, truncated multimode Fock space).

    Immutable: the matrix is frozen after construction and all operations
    return new instances.
    """

    __slots__ = ("modes", "kets", "index", "matrix", "_n_occ")

    def __init__(self, modes: Sequence[ModeLabel], matrix: np.ndarray):
        modes = tuple(sorted(set(modes)))
        kets, index, n_occ = _basis(modes)
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (len(kets), len(kets)):
            raise ValueError(f"matrix shape {matrix.shape} does not match basis "
                             f"dimension {len(kets)}")
        matrix.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "kets", kets)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_n_occ", n_occ)

    def __setattr__(self, name, value):
        raise AttributeError("JointState is immutable")

    @property
    def dim(self) -> int:
        return len(self.kets)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def probability(self, ket: BasisKet) -> float:
        i = self.index[ket]
        return float(np.real(self.matrix[i, i]))

    def amplitude(self, ket_a: BasisKet, ket_b: BasisKet) -> complex:
        return complex(self.matrix[self.index[ket_a], self.index[ket_b]])

    def mean_photon_number(self, mode: ModeLabel) -> float:
        diag = np.real(np.diagonal(self.matrix))
        counts = np.array([ket.occupation(mode) for ket in self.kets])
        return float(np.sum(diag * counts))

    def ion_density_matrix(self) -> np.ndarray:
        """Partial trace over all photonic modes: 4x4 over (ion1, ion2)."""
        n = self._n_occ
        blocks = self.matrix.reshape(4, n, 4, n)
        return np.einsum("anbn->ab", blocks)

    def expand(self, extra_modes: Iterable[ModeLabel]) -> "JointState":
        """Embed into a larger mode set; new modes start in vacuum."""
        new_modes = tuple(sorted(set(self.modes) | set(extra_modes)))
        if new_modes == self.modes:
            return self
        target = JointState(new_modes, np.zeros((_dim_of(new_modes),) * 2))
        mapping = [target.index[ket] for ket in self.kets]
        matrix = np.zeros((target.dim, target.dim), dtype=complex)
        matrix[np.ix_(mapping, mapping)] = self.matrix
        return JointState(new_modes, matrix)

    def validate(self):
        """Raise if the state violates hermiticity, positivity, or trace bounds."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_ATOL:
            raise ValueError("state is not Hermitian")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < PSD_EIGENVALUE_FLOOR:
            raise ValueError(f"state is not positive semidefinite (min eig {eigs.min():.3e})")
        if self.trace() > 1 + TRACE_ATOL:
            raise ValueError(f"trace {self.trace()} exceeds 1")
        return self


def _dim_of(modes: tuple[ModeLabel, ...]) -> int:
    kets, _, _ = _basis(modes)
    return len(kets)


def make_state(amplitudes: Sequence[tuple[BasisKet, complex]],
               modes: Iterable[ModeLabel] = ()) -> JointState:
    """Build the normalized pure-state density operator sum_i a_i |ket_i>.

    `modes` may list additional (initially empty) modes to include in the
    basis, e.g. targets of later beamsplitters.
    """
    if not amplitudes:
        raise ValueError("make_state requires at least one ket")
    mode_set = set(modes)
    for ket, _ in amplitudes:
        mode_set.update(ket.modes())
    all_modes = tuple(sorted(mode_set))
    kets, index, _ = _basis(all_modes)
    vec = np.zeros(len(kets), dtype=complex)
    for ket, amp in amplitudes:
        vec[index[ket]] += amp
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValueError("amplitudes are not normalizable (zero vector)")
    vec /= norm
    return JointState(all_modes, np.outer(vec, vec.conj()))


@dataclass(frozen=True)
class BeamsplitterSpec:
    """Two-mode passive element a' = sqrt(T) a + i sqrt(1-T) e^{i phi} b.

    The induced transform is unitary for every transmissivity and phase;
    the i on the cross terms fixes the convention used throughout.
    """

    mode_a: ModeLabel
    mode_b: ModeLabel
    transmissivity: float = 0.5
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")

    def transfer_matrix(self) -> np.ndarray:
        t = math.sqrt(self.transmissivity)
        r = math.sqrt(1.0 - self.transmissivity)
        ph = np.exp(1j * self.phase)
        # columns are images of (a_dag, b_dag)
        return np.array([[t, 1j * r * np.conj(ph)],
                         [1j * r * ph, t]])

    def inverse(self) -> "BeamsplitterSpec":
        return BeamsplitterSpec(self.mode_a, self.mode_b,
                                self.transmissivity, self.phase + math.pi)


@dataclass(frozen=True)
class DetectorSpec:
    """Non-number-resolving detector over a set of monitored modes."""

    id: int
    modes: frozenset[ModeLabel]
    efficiency: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modes", frozenset(self.modes))
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("detector efficiency must lie in [0, 1]")


@dataclass(frozen=True)
class DetectionOutcome:
    """One click/no-click pattern with its probability and heralded ion state."""

    pattern: int               # bitmask over detector ids
    probability: float
    ion_state: np.ndarray      # 4x4, trace-normalized (zeros if probability ~ 0)


@lru_cache(maxsize=4096)
def _pair_unitary(modes: tuple[ModeLabel, ...], mode_a: ModeLabel,
                  mode_b: ModeLabel, u00: complex, u01: complex,
                  u10: complex, u11: complex) -> np.ndarray:
    """Many-body matrix of a two-mode linear element on the truncated basis.

    Built by expanding the transformed creation-operator monomial of each
    basis ket: a_dag -> u00 a_dag + u10 b_dag, b_dag -> u01 a_dag + u11 b_dag.
    """
    kets, index, _ = _basis(modes)
    dim = len(kets)
    U = np.zeros((dim, dim), dtype=complex)
    for col, ket in enumerate(kets):
        na = ket.occupation(mode_a)
        nb = ket.occupation(mode_b)
        if na == 0 and nb == 0:
            U[col, col] = 1.0
            continue
        norm_in = math.sqrt(math.factorial(na) * math.factorial(nb))
        for i in range(na + 1):
            for j in range(nb + 1):
                coeff = (math.comb(na, i) * u00 ** i * u10 ** (na - i)
                         * math.comb(nb, j) * u01 ** j * u11 ** (nb - j))
                ja = i + j
                jb = (na - i) + (nb - j)
                target = ket.replace_occupations({mode_a: ja, mode_b: jb})
                amp = coeff * math.sqrt(math.factorial(ja) * math.factorial(jb)) / norm_in
                U[index[target], col] += amp
    U.setflags(write=False)
    return U


def apply_beamsplitter(state: JointState, bs: BeamsplitterSpec) -> JointState:
    """Conjugate the state by the beamsplitter unitary; trace preserving."""
    if bs.mode_a == bs.mode_b:
        raise ValueError("beamsplitter modes must be distinct")
    for mode in (bs.mode_a, bs.mode_b):
        if mode not in state.modes:
            raise ValueError(f"mode {mode!r} is not in the state basis")
    u = bs.transfer_matrix()
    U = _pair_unitary(state.modes, bs.mode_a, bs.mode_b,
                      complex(u[0, 0]), complex(u[0, 1]),
                      complex(u[1, 0]), complex(u[1, 1]))
    return JointState(state.modes, U @ state.matrix @ U.conj().T)


@lru_cache(maxsize=4096)
def _loss_kraus(modes: tuple[ModeLabel, ...], mode: ModeLabel,
                transmission: float) -> tuple[np.ndarray, ...]:
    """Amplitude-damping Kraus operators K_k (k photons lost) for one mode."""
    kets, index, _ = _basis(modes)
    dim = len(kets)
    ops = [np.zeros((dim, dim), dtype=complex) for _ in range(MAX_TOTAL_PHOTONS + 1)]
    for col, ket in enumerate(kets):
        n = ket.occupation(mode)
        for k in range(n + 1):
            amp = math.sqrt(math.comb(n, k)
                            * transmission ** (n - k)
                            * (1.0 - transmission) ** k)
            if amp == 0.0:
                continue
            target = ket.replace_occupations({mode: n - k}) if k else ket
            ops[k][index[target], col] = amp
    for op in ops:
        op.setflags(write=False)
    return tuple(ops)


def apply_loss(state: JointState, mode: ModeLabel, transmission: float) -> JointState:
    """Single-mode amplitude damping: photon survives with probability `transmission`."""
    if not 0.0 <= transmission <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    if mode not in state.modes:
        return state
    if transmission == 1.0:
        return state
    kraus = _loss_kraus(state.modes, mode, float(transmission))
    out = np.zeros_like(state.matrix)
    for K in kraus:
        out += K @ state.matrix @ K.conj().T
    return JointState(state.modes, out)


def apply_phase(state: JointState, mode: ModeLabel, phase: float) -> JointState:
    """Number-operator phase exp(i n phase) on one mode; trace preserving."""
    if mode not in state.modes:
        return state
    counts = np.array([ket.occupation(mode) for ket in state.kets])
    diag = np.exp(1j * phase * counts)
    return JointState(state.modes, diag[:, None] * state.matrix * diag.conj()[None, :])


def apply_crosstalk(state: JointState, source: ModeLabel, target: ModeLabel,
                    amplitude: float, phase: float = 0.0) -> JointState:
    """Coherent leakage of `amplitude` (chi) from source into target.

    Realized as a beamsplitter of transmissivity 1 - chi^2, so the leaked
    power is chi^2 (reported in dB as 10 log10 chi^2).
    """
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("cross-talk amplitude must lie in [0, 1]")
    if source == target:
        raise ValueError("cross-talk modes must be distinct")
    if amplitude == 0.0:
        return state
    bs = BeamsplitterSpec(source, target, 1.0 - amplitude ** 2, phase)
    return apply_beamsplitter(state, bs)


def detect(state: JointState, detectors: Sequence[DetectorSpec]) -> list[DetectionOutcome]:
    """Enumerate all click/no-click patterns of non-number-resolving detectors.

    Each photon in a monitored mode fires its detector independently with
    probability equal to the detector efficiency, so the no-click POVM
    element is diagonal with weight (1 - eta)^n over the monitored photon
    number n.  Conditional states have all photonic modes traced out.
    Probabilities over all patterns sum to one.
    """
    seen: set[ModeLabel] = set()
    for det in detectors:
        if seen & det.modes:
            raise ValueError("detector mode sets must be disjoint")
        seen |= det.modes
        for mode in det.modes:
            if mode not in state.modes:
                raise ValueError(f"detector monitors unknown mode {mode!r}")

    n_occ = state._n_occ
    photon_kets = state.kets[:n_occ]  # occupation layout repeats per ion block
    no_click = []
    for det in detectors:
        counts = np.array([sum(k.occupation(m) for m in det.modes) for k in photon_kets])
        no_click.append((1.0 - det.efficiency) ** counts)

    blocks = state.matrix.reshape(4, n_occ, 4, n_occ)
    outcomes = []
    for pattern in range(2 ** len(detectors)):
        weight = np.ones(n_occ)
        for bit, det in enumerate(detectors):
            w = no_click[bit]
            weight = weight * ((1.0 - w) if (pattern >> bit) & 1 else w)
        ion = np.einsum("anbn,n->ab", blocks, weight)
        prob = float(np.real(np.trace(ion)))
        if prob > 1e-15:
            ion = ion / prob
        else:
            ion = np.zeros((4, 4), dtype=complex)
        outcomes.append(DetectionOutcome(pattern, prob, ion))

    total = sum(o.probability for o in outcomes)
    if abs(total - state.trace()) > DETECTION_COMPLETENESS_ATOL:
        raise AssertionError(f"detection POVM not complete: {total} vs {state.trace()}")
    return outcomes


# Ion-pair basis order: (dn,dn), (dn,up), (up,dn), (up,up)
_KET_UP_DN = np.array([0.0, 0.0, 1.0, 0.0])
_KET_DN_UP = np.array([0.0, 1.0, 0.0, 0.0])
PSI_PLUS = (_KET_UP_DN + _KET_DN_UP) / math.sqrt(2.0)
PSI_MINUS = (_KET_UP_DN - _KET_DN_UP) / math.sqrt(2.0)

_BELL_TARGETS = {"psi_plus": PSI_PLUS, "psi_minus": PSI_MINUS}

_Z1 = np.diag([1.0, 1.0, -1.0, -1.0])
_X1 = np.zeros((4, 4))
_X1[0, 2] = _X1[2, 0] = _X1[1, 3] = _X1[3, 1] = 1.0
_CORRECTIONS = {
    "identity": np.eye(4),
    "z": _Z1,
    "x": _X1,
    "zx": _Z1 @ _X1,
}


def bell_fidelity(rho_ions: np.ndarray, target: str,
                  correction: str = "identity") -> float:
    """Overlap <target| U rho U^dag |target> after a single-qubit correction on ion 1.

    `target` is "psi_plus" or "psi_minus"; `correction` one of
    "identity", "z", "x", "zx" (applied to ion 1).
    """
    rho = np.asarray(rho_ions, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("ion state must be a 4x4 density matrix")
    if abs(np.real(np.trace(rho)) - 1.0) > 1e-9:
        raise ValueError("ion state must be trace-normalized")
    try:
        vec = _BELL_TARGETS[target]
    except KeyError:
        raise ValueError(f"unknown Bell target {target!r}") from None
    try:
        U = _CORRECTIONS[correction]
    except KeyError:
        raise ValueError(f"unknown correction {correction!r}") from None
    corrected = U @ rho @ U.conj().T
    return float(np.real(vec.conj() @ corrected @ vec))
