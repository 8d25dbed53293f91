"""Excitation-relation subsets ``S_k`` and the harmonic report built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .hilbert import CompositeSpace, grouping_permutation, inverse_permutation
from .phase import (
    DEFAULT_GRID_POINTS,
    PhaseDistribution,
    relative_phase_distribution,
    weight_matrix,
)

#: amplitudes at or below this count as no signal
AMPLITUDE_FLOOR = 1e-12


class SubsetMember(NamedTuple):
    m1: float
    m2: float
    n1: float
    n2: float
    value: complex
    row: int
    col: int


def subset_mask(space: CompositeSpace, k: int) -> np.ndarray:
    """Boolean ``D x D`` mask of ``S_k``; ``k=0`` includes the diagonal."""
    return space.excitation_mask() & (space.offset_matrix() == k)


def subset_members(rho, space: CompositeSpace, k: int) -> list[SubsetMember]:
    """Elements ``<m1, m2| rho |n1, n2>`` of ``S_k`` in row-major order.

    Labels are Fock numbers for oscillators and ``m_s`` for spins.  Negative
    ``k`` gives the conjugate subset.
    """
    rho = np.asarray(rho)
    x1, x2 = space.excitation_labels()
    rows, cols = np.nonzero(subset_mask(space, k))
    return [
        SubsetMember(x1[r], x2[r], x1[c], x2[c], complex(rho[r, c]), int(r), int(c))
        for r, c in zip(rows, cols)
    ]


def subset_coefficient(rho, space: CompositeSpace, method: str, k: int) -> complex:
    """Weighted sum ``C_k`` over ``S_k`` for any integer ``k``."""
    w = weight_matrix(space, method)
    return complex((np.asarray(rho) * w)[subset_mask(space, k)].sum())


def coherence_mass(rho, space: CompositeSpace) -> tuple[float, float]:
    """``(inside, outside)``: summed ``|rho_ij|`` of off-diagonal elements in and out of S."""
    a = np.abs(np.asarray(rho))
    mask = space.excitation_mask()
    off = ~np.eye(a.shape[0], dtype=bool)
    return float(a[mask & off].sum()), float(a[~mask].sum())


def mask_coherences(rho, space: CompositeSpace, keep: str) -> np.ndarray:
    """Copy of ``rho`` with one class of coherences zeroed.

    ``keep="inside"`` zeroes every element violating the excitation relation;
    ``keep="outside"`` zeroes the off-diagonal members of S instead.  The
    diagonal is always kept.
    """
    out = np.array(rho, dtype=complex)
    mask = space.excitation_mask()
    diag = np.eye(out.shape[0], dtype=bool)
    if keep == "inside":
        out[~mask] = 0
    elif keep == "outside":
        out[mask & ~diag] = 0
    else:
        raise ValueError("keep must be 'inside' or 'outside'")
    return out


@dataclass(frozen=True)
class SubsetEntry:
    k: int
    members: list[SubsetMember]
    coefficient: complex
    magnitude_sum: float

    @property
    def amplitude(self) -> float:
        return abs(self.coefficient)

    @property
    def theta(self) -> float:
        return float(np.angle(self.coefficient))


@dataclass
class SubsetReport:
    pair_type: str
    method: str
    entries: list[SubsetEntry]
    k_d: int
    sync_measure: float
    distribution: PhaseDistribution = field(repr=False)
    grouped_position: np.ndarray = field(repr=False)

    def entry(self, k: int) -> SubsetEntry:
        for e in self.entries:
            if e.k == k:
                return e
        raise KeyError(k)

    def amplitudes(self) -> dict[int, float]:
        return {e.k: e.amplitude for e in self.entries if e.k >= 1}

    def to_dict(self, digits: int = 15) -> dict:
        """JSON-ready form; every member carries lexicographic and grouped coordinates."""
        def num(x):
            return float(f"{float(x):.{digits}g}")

        pos = self.grouped_position
        subsets = []
        for e in self.entries:
            members = [
                {
                    "m1": num(m.m1), "m2": num(m.m2), "n1": num(m.n1), "n2": num(m.n2),
                    "row": m.row, "col": m.col,
                    "grouped_row": int(pos[m.row]), "grouped_col": int(pos[m.col]),
                    "re": num(m.value.real), "im": num(m.value.imag),
                }
                for m in e.members
            ]
            subsets.append({
                "k": e.k,
                "members": members,
                "C_re": num(e.coefficient.real),
                "C_im": num(e.coefficient.imag),
                "A": num(e.amplitude),
                "theta": num(e.theta),
                "L": num(e.magnitude_sum),
            })
        return {
            "pair_type": self.pair_type,
            "method": self.method,
            "k_d": self.k_d,
            "S_m": num(self.sync_measure),
            "subsets": subsets,
        }


def dominant_mode(amplitudes: dict[int, float], floor: float = AMPLITUDE_FLOOR) -> int:
    """Smallest ``k`` whose amplitude is within 1e-12 of the maximum; 0 if all vanish."""
    if not amplitudes:
        return 0
    top = max(amplitudes.values())
    if top <= floor:
        return 0
    return min(k for k, a in amplitudes.items() if a >= top - 1e-12)


def sync_measure(dist: PhaseDistribution) -> float:
    """``max S(phi)`` over the grid, ``S = P - 1/(2 pi)``."""
    return float(dist.shifted().max())


def harmonic_report(
    rho, space: CompositeSpace, method: str, grid_points: int = DEFAULT_GRID_POINTS
) -> SubsetReport:
    """Subsets ``S_0 .. S_kmax`` with ``C_k``, ``A_k``, ``theta_k``, ``L_k``, ``k_d`` and ``S_m``.

    ``L_k`` sums the magnitudes of the weighted members, so ``A_k <= L_k``
    holds for every method, including Wigner weights of either sign.
    """
    rho = np.asarray(rho)
    dist = relative_phase_distribution(rho, space, method, grid_points)
    weighted = rho * weight_matrix(space, method)
    entries = []
    for k in range(0, space.max_harmonic() + 1):
        mask = subset_mask(space, k)
        entries.append(SubsetEntry(
            k,
            subset_members(rho, space, k),
            complex(weighted[mask].sum()),
            float(np.abs(weighted[mask]).sum()),
        ))
    k_d = dominant_mode({e.k: e.amplitude for e in entries if e.k >= 1})
    return SubsetReport(
        pair_type=space.pair_type,
        method=method,
        entries=entries,
        k_d=k_d,
        sync_measure=sync_measure(dist),
        distribution=dist,
        grouped_position=inverse_permutation(grouping_permutation(space)),
    )


def peak_positions(report: SubsetReport | PhaseDistribution, k_d: int | None = None) -> list[float]:
    """The ``k_d`` highest local maxima of ``P(phi)`` in ``[0, 2 pi)``.

    Candidates come from the sampled grid and are polished on the analytic
    harmonic form, so comparable subleading modes shift the peaks correctly.
    Returns an empty list when there is no dominant mode.
    """
    if isinstance(report, SubsetReport):
        dist, k_d = report.distribution, report.k_d if k_d is None else k_d
    else:
        dist = report
        if k_d is None:
            k_d = dominant_mode({k: abs(c) for k, c in dist.coefficients.items()})
    if not k_d:
        return []
    v = dist.values
    is_max = (v >= np.roll(v, 1)) & (v > np.roll(v, -1))
    idx = np.flatnonzero(is_max)
    idx = idx[np.argsort(-v[idx], kind="stable")][:k_d]
    step = 2 * math.pi / v.size
    peaks = []
    for i in idx:
        lo, hi = dist.phi[i] - step, dist.phi[i] + step
        dlo, dhi = float(dist.derivative(lo)), float(dist.derivative(hi))
        if dlo > 0 > dhi:
            x = optimize.brentq(lambda t: float(dist.derivative(t)), lo, hi, xtol=1e-14)
        else:
            x = optimize.minimize_scalar(
                lambda t: -float(dist.evaluate(t)), bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-10},
            ).x
        x = float(x % (2 * math.pi))
        peaks.append(0.0 if 2 * math.pi - x < 1e-12 else x)
    return sorted(peaks)
