"""Entropic and entanglement measures of bipartite steady states (natural log)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

#: eigenvalues below this are treated as exact zeros in entropies
EIGEN_FLOOR = 1e-14

_PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class NotXStateError(ValueError):
    pass


@dataclass(frozen=True)
class BipartiteSplit:
    dims: tuple[int, int]

    def __post_init__(self):
        d1, d2 = self.dims
        if d1 < 1 or d2 < 1:
            raise ValueError("subsystem dimensions must be positive")

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def check(self, rho: np.ndarray) -> None:
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state of shape {rho.shape} does not fit split {self.dims}")


def _as_split(split) -> BipartiteSplit:
    if isinstance(split, BipartiteSplit):
        return split
    if hasattr(split, "dims"):
        return BipartiteSplit(tuple(split.dims))
    return BipartiteSplit(tuple(split))


def _entropy_of(eigs: np.ndarray) -> float:
    p = eigs[eigs > EIGEN_FLOOR]
    return float(-(p * np.log(p)).sum())


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho ln rho)`` with ``0 ln 0 = 0``."""
    rho = np.asarray(rho)
    if np.abs(rho - rho.conj().T).max(initial=0.0) > 1e-8:
        raise ValueError("density matrix is not Hermitian")
    return _entropy_of(np.linalg.eigvalsh((rho + rho.conj().T) / 2))


def relative_entropy_of_coherence(rho) -> float:
    """``S(rho_diag) - S(rho)`` in the basis ``rho`` is written in."""
    rho = np.asarray(rho)
    return _entropy_of(np.real(np.diag(rho)).copy()) - von_neumann_entropy(rho)


def partial_trace(rho, split, keep: int) -> np.ndarray:
    """Reduced state of subsystem ``keep`` (0 or 1)."""
    sp_ = _as_split(split)
    rho = np.asarray(rho)
    sp_.check(rho)
    d1, d2 = sp_.dims
    r = rho.reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("ijil->jl", r)
    raise ValueError("keep must be 0 or 1")


def partial_transpose(rho, split, sys: int = 0) -> np.ndarray:
    """Transpose the indices of subsystem ``sys`` (0 or 1)."""
    sp_ = _as_split(split)
    rho = np.asarray(rho)
    sp_.check(rho)
    d1, d2 = sp_.dims
    r = rho.reshape(d1, d2, d1, d2)
    if sys == 0:
        r = r.transpose(2, 1, 0, 3)
    elif sys == 1:
        r = r.transpose(0, 3, 2, 1)
    else:
        raise ValueError("sys must be 0 or 1")
    return r.reshape(d1 * d2, d1 * d2)


def mutual_information(rho, split) -> float:
    """``S(rho_1) + S(rho_2) - S(rho)``."""
    return (
        von_neumann_entropy(partial_trace(rho, split, 0))
        + von_neumann_entropy(partial_trace(rho, split, 1))
        - von_neumann_entropy(rho)
    )


def negativity(rho, split) -> float:
    """``(||rho^T1||_1 - 1) / 2``; the trace norm comes from singular values."""
    pt = partial_transpose(rho, split, 0)
    return float((np.linalg.svd(pt, compute_uv=False).sum() - 1) / 2)


_X_PATTERN = np.array([
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 1, 1, 0],
    [1, 0, 0, 1],
], dtype=bool)


def is_x_state(rho, atol: float = 1e-10) -> bool:
    rho = np.asarray(rho)
    return rho.shape == (4, 4) and np.abs(rho[~_X_PATTERN]).max() <= atol


def _swap_qubits(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


def _binary_entropy_2x2(tr, det) -> np.ndarray:
    """Entropy of 2x2 Hermitian blocks given trace and determinant (unnormalized)."""
    disc = np.sqrt(np.maximum(tr * tr - 4 * det, 0.0))
    out = np.zeros(np.broadcast(tr, det).shape)
    for lam in ((tr + disc) / 2, (tr - disc) / 2):
        safe = np.where(lam > EIGEN_FLOOR, lam, 1.0)
        out = out - np.where(lam > EIGEN_FLOOR, lam * np.log(safe), 0.0)
    return out


def _conditional_entropy(rho: np.ndarray, theta, phi) -> np.ndarray:
    """``sum_j p_j S(rho_1|j)`` for projective measurement of qubit 2 along ``(theta, phi)``."""
    r = rho.reshape(2, 2, 2, 2)
    a = np.einsum("ijkj->ik", r)
    # b[a] = Tr_2[(I x sigma_a) rho]
    b = np.einsum("ijkl,alj->aik", r, _PAULI)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    nb = np.tensordot(n, b, axes=(0, 0))
    total = np.zeros(np.broadcast(theta, phi).shape)
    for sign in (1.0, -1.0):
        blk = (a + sign * nb) / 2
        tr = np.real(blk[..., 0, 0] + blk[..., 1, 1])
        det = np.real(blk[..., 0, 0] * blk[..., 1, 1] - blk[..., 0, 1] * blk[..., 1, 0])
        s_unnorm = _binary_entropy_2x2(tr, det)
        # S(blk/p) * p = S_unnorm + p ln p
        p = np.maximum(tr, 0.0)
        plogp = np.where(p > EIGEN_FLOOR, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        total = total + s_unnorm + plogp
    return total


def x_state_discord(rho, measure_on: int = 2, grid: int = 181) -> tuple[float, float, float]:
    """Mutual information, classical correlation and discord ``(I, J, D)`` of an X state.

    ``J = S(rho_1) - min sum_j p_j S(rho_1|j)`` over projective measurements
    on qubit 2.  The measurement axis is searched on a ``grid x grid`` mesh of
    ``theta in [0, pi/2]``, ``phi in [0, pi)``, which covers every axis up to
    the symmetries of an X state, then refined by Nelder-Mead.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotXStateError("discord is implemented for two qubits only")
    if not is_x_state(rho):
        raise NotXStateError("state has entries outside the X pattern")
    if measure_on == 1:
        rho = _swap_qubits(rho)
    elif measure_on != 2:
        raise ValueError("measure_on must be 1 or 2")

    split = BipartiteSplit((2, 2))
    info = mutual_information(rho, split)
    s1 = von_neumann_entropy(partial_trace(rho, split, 0))

    th, ph = np.meshgrid(
        np.linspace(0, np.pi / 2, grid), np.linspace(0, np.pi, grid, endpoint=False), indexing="ij"
    )
    cond = _conditional_entropy(rho, th, ph)
    i = np.unravel_index(np.argmin(cond), cond.shape)
    best = float(cond[i])
    res = optimize.minimize(
        lambda x: float(_conditional_entropy(rho, x[0], x[1])),
        x0=[th[i], ph[i]],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14},
    )
    best = min(best, float(res.fun))
    classical = s1 - best
    return info, classical, info - classical
