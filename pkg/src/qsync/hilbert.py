"""Truncated Fock and spin operator algebras and two-body composite spaces.

Basis conventions used throughout the package:

* cv oscillator: index ``i`` is the Fock number ``m = i``, ``0 <= m <= n_max``.
* spin ``s``: index ``i`` carries ``m_s = s - i`` (largest ``S_z`` first).
* qubit: dissipative-limit oscillator restricted to Fock states ``|0>, |1>``.
* composite (lexicographic): ``(i1, i2) -> i1 * d2 + i2``, i.e. ``np.kron``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

KINDS = ("cv", "spin", "qubit")
ORDERINGS = ("lexicographic", "excitation_grouped")


class SpaceError(ValueError):
    """Raised for malformed subsystem or composite-space definitions."""


@dataclass(frozen=True)
class SystemSpec:
    """One self-sustained oscillator.

    ``kind="cv"`` is a Van der Pol oscillator truncated at ``n_max``;
    ``kind="spin"`` is a spin of magnitude ``s`` with the equatorial
    limit-cycle dissipators; ``kind="qubit"`` is the dissipative limit of
    the Van der Pol oscillator (gain ``D[sigma_+]`` at ``gamma_g``, loss
    ``D[sigma_-]`` at ``gamma_l``).
    """

    kind: str
    omega: float = 1.0
    gamma_g: float = 1.0
    gamma_l: float = 1.0
    n_max: int | None = None
    s: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"unknown system kind {self.kind!r}")
        if self.gamma_g < 0 or self.gamma_l < 0:
            raise SpaceError("rates must be non-negative")
        if self.kind == "cv":
            if self.n_max is None or int(self.n_max) != self.n_max or self.n_max < 1:
                raise SpaceError("cv system needs an integer n_max >= 1")
        elif self.kind == "spin":
            if self.s is None or 2 * self.s != int(2 * self.s) or self.s <= 0:
                raise SpaceError("spin system needs a positive half-integer s")

    @property
    def dim(self) -> int:
        if self.kind == "cv":
            return int(self.n_max) + 1
        if self.kind == "spin":
            return int(round(2 * self.s)) + 1
        return 2

    @property
    def is_oscillator(self) -> bool:
        """True for Fock-labelled systems (cv and qubit)."""
        return self.kind != "spin"

    def labels(self) -> np.ndarray:
        """Excitation label of every basis index: Fock number or ``m_s``."""
        if self.is_oscillator:
            return np.arange(self.dim, dtype=float)
        return self.s - np.arange(self.dim, dtype=float)

    def label_str(self, i: int) -> str:
        if self.is_oscillator:
            return str(i)
        return str(Fraction(self.s) - i)


def fock_ladder(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators on ``|0>..|n_max>``."""
    if n_max < 1:
        raise SpaceError("n_max must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def spin_operators(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(S_plus, S_minus, S_z)`` in the ``m_s = s, s-1, ..., -s`` basis."""
    two_s = 2 * s
    if two_s != int(two_s) or two_s < 1:
        raise SpaceError("2s must be a positive integer")
    m = s - np.arange(int(two_s) + 1)
    sz = np.diag(m).astype(complex)
    # S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> sits one index up
    coeff = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp = np.diag(coeff, k=1).astype(complex)
    return sp, sp.conj().T, sz


def tensor(op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    """Kronecker product in lexicographic composite indexing."""
    op_a = np.asarray(op_a)
    op_b = np.asarray(op_b)
    if op_a.ndim != 2 or op_a.shape[0] != op_a.shape[1]:
        raise SpaceError("tensor expects square matrices")
    if op_b.ndim != 2 or op_b.shape[0] != op_b.shape[1]:
        raise SpaceError("tensor expects square matrices")
    return np.kron(op_a, op_b)


def local_ladder(spec: SystemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Lowering and raising operator of a subsystem (``a``/``a^dag`` or ``S_-``/``S_+``)."""
    if spec.kind == "cv":
        return fock_ladder(spec.n_max)
    if spec.kind == "qubit":
        return fock_ladder(1)
    sp, sm, _ = spin_operators(spec.s)
    return sm, sp


def number_like(spec: SystemSpec) -> np.ndarray:
    """Free-Hamiltonian generator: ``a^dag a`` for oscillators, ``S_z`` for spins."""
    if spec.is_oscillator:
        return np.diag(np.arange(spec.dim, dtype=float)).astype(complex)
    return spin_operators(spec.s)[2]


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered pair of subsystems.

    ``pair_type`` is ``cv_cv`` (oscillators or qubits), ``spin_spin`` or
    ``hybrid`` (oscillator first, spin second).  The conserved quantity that
    selects phase-relevant coherences is the total excitation for the first
    two and the excitation difference ``m_o - m_s`` for the hybrid.
    """

    specs: tuple[SystemSpec, SystemSpec]
    ordering: str = "lexicographic"

    def __post_init__(self):
        if len(self.specs) != 2:
            raise SpaceError("a composite space needs exactly two subsystems")
        object.__setattr__(self, "specs", tuple(self.specs))
        if self.ordering not in ORDERINGS:
            raise SpaceError(f"unknown ordering {self.ordering!r}")
        a, b = self.specs
        if not a.is_oscillator and b.is_oscillator:
            raise SpaceError("hybrid spaces are ordered (oscillator, spin)")

    @property
    def dims(self) -> tuple[int, int]:
        return self.specs[0].dim, self.specs[1].dim

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def pair_type(self) -> str:
        a, b = self.specs
        if a.is_oscillator and b.is_oscillator:
            return "cv_cv"
        if not a.is_oscillator and not b.is_oscillator:
            return "spin_spin"
        return "hybrid"

    def index(self, i1: int, i2: int) -> int:
        return i1 * self.dims[1] + i2

    def split(self, idx):
        return np.divmod(idx, self.dims[1])

    @cached_property
    def _labels(self) -> tuple[np.ndarray, np.ndarray]:
        i1, i2 = self.split(np.arange(self.dim))
        return self.specs[0].labels()[i1], self.specs[1].labels()[i2]

    def excitation_labels(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-basis-index excitation labels ``(x1, x2)`` of both subsystems."""
        return self._labels

    def charge(self) -> np.ndarray:
        """Grouping key per basis index (total excitation or excitation difference)."""
        x1, x2 = self._labels
        if self.pair_type == "hybrid":
            return x1 - x2
        if self.pair_type == "spin_spin":
            # index-based total keeps the key non-negative; m_s total = s1+s2-key
            i1, i2 = self.split(np.arange(self.dim))
            return (i1 + i2).astype(float)
        return x1 + x2

    def excitation_mask(self) -> np.ndarray:
        """Boolean ``D x D`` mask of elements obeying the excitation relation."""
        q = self.charge()
        return np.isclose(q[:, None], q[None, :])

    def offset_matrix(self) -> np.ndarray:
        """Integer ``D x D`` matrix of ``k = x1(row) - x1(col)``."""
        x1 = self._labels[0]
        return np.rint(x1[:, None] - x1[None, :]).astype(int)

    def max_harmonic(self) -> int:
        # |k| is bounded by both subsystems in every pair type
        d1, d2 = self.dims
        return min(d1 - 1, d2 - 1)

    def basis_label(self, idx: int) -> tuple[str, str]:
        i1, i2 = self.split(idx)
        return self.specs[0].label_str(int(i1)), self.specs[1].label_str(int(i2))


def grouping_permutation(space: CompositeSpace) -> np.ndarray:
    """Basis order that groups states sharing the grouping key.

    ``perm[j]`` is the lexicographic index placed at grouped position ``j``;
    ``rho[np.ix_(perm, perm)]`` is block diagonal in the phase-relevant
    coherences.  Ties keep lexicographic order (ascending first-subsystem index).
    """
    key = space.charge()
    return np.argsort(np.rint(key * 2).astype(int), kind="stable")


def inverse_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def grouped_blocks(space: CompositeSpace) -> list[list[int]]:
    """Lexicographic indices of each grouping block, in grouped order."""
    perm = grouping_permutation(space)
    key = np.rint(space.charge() * 2).astype(int)
    blocks: list[list[int]] = []
    last = None
    for idx in perm:
        if key[idx] != last:
            blocks.append([])
            last = key[idx]
        blocks[-1].append(int(idx))
    return blocks


def is_density_matrix(rho: np.ndarray, atol: float = 1e-8) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        return False
    if abs(np.trace(rho) - 1) > 1e-10:
        return False
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -atol
