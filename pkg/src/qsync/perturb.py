"""Weak-coupling expansion of the steady state through the pseudoinverse of ``L0``.

With ``L = L0 + eps * L_I`` the steady state expands as
``rho = rho0 + eps rho1 + eps^2 rho2 + ...`` where
``rho_n = -L0^+ L_I rho_{n-1}`` and every correction is traceless.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .hilbert import CompositeSpace
from .lindblad import steady_state, unvec, vec

#: largest operator dimension D for which the dense D^2 x D^2 SVD is attempted
MAX_DENSE_DIM = 100
RCOND = 1e-10


class CapacityError(RuntimeError):
    """Dense pseudoinverse requested above the configured size limit."""


def _dense(lv) -> np.ndarray:
    return lv.toarray() if sp.issparse(lv) else np.asarray(lv)


def pseudoinverse(l0, max_dim: int = MAX_DENSE_DIM, rcond: float = RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse by dense SVD.

    Singular values below ``rcond * sigma_max`` are treated as zero.
    """
    dim = int(round(np.sqrt(l0.shape[0])))
    if dim > max_dim:
        raise CapacityError(f"operator dimension {dim} exceeds dense limit {max_dim}")
    u, s, vh = la.svd(_dense(l0), lapack_driver="gesdd")
    keep = s > rcond * s[0]
    return (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T


def pseudoinverse_apply(l0, x, max_dim: int = MAX_DENSE_DIM) -> np.ndarray:
    """``unvec(L0^+ vec(x))``, the minimum-norm least-squares preimage of ``x``."""
    x = np.asarray(x)
    return unvec(pseudoinverse(l0, max_dim) @ vec(x), x.shape[0])


@dataclass
class PerturbationSeries:
    base: np.ndarray
    corrections: list[np.ndarray] = field(default_factory=list)
    epsilon: float = 1.0

    def evaluate(self, epsilon: float | None = None, order: int | None = None) -> np.ndarray:
        """Partial sum ``rho0 + sum_n eps^n rho_n`` up to ``order``."""
        eps = self.epsilon if epsilon is None else epsilon
        terms = self.corrections if order is None else self.corrections[:order]
        out = self.base.copy()
        for n, c in enumerate(terms, start=1):
            out = out + eps**n * c
        return out


def perturbative_steady_state(l0, l_int, order: int, max_dim: int = MAX_DENSE_DIM) -> PerturbationSeries:
    """Corrections ``rho_1 .. rho_order`` for unit-strength coupling ``l_int``.

    Each correction is Hermitian-symmetrized and made traceless by removing
    its component along ``rho0``, which spans the kernel of ``L0``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    rho0 = steady_state(l0)
    dim = rho0.shape[0]
    pinv = pseudoinverse(l0, max_dim)
    lint = sp.csr_matrix(l_int)
    series = PerturbationSeries(rho0)
    prev = rho0
    for _ in range(order):
        x = unvec(-(pinv @ (lint @ vec(prev))), dim)
        x = (x + x.conj().T) / 2
        x = x - np.trace(x).real * rho0
        series.corrections.append(x)
        prev = x
    return series


def _subset_labels(space: CompositeSpace) -> np.ndarray:
    """Subset index ``k`` of every matrix element, or a sentinel outside S."""
    k = space.offset_matrix().astype(float)
    return np.where(space.excitation_mask(), k, np.nan)


def subset_transfer(lv, space: CompositeSpace, k: int) -> dict:
    """Where ``L`` sends the basis operators of ``S_k``.

    Returns the summed magnitude of ``L vec(X)`` over all ``X`` in ``S_k``,
    keyed by the target subset index and ``"outside"`` for elements that
    violate the excitation relation.
    """
    dim = space.dim
    labels = _subset_labels(space)
    rows, cols = np.nonzero(labels == k)
    if rows.size == 0:
        return {}
    lv = sp.csc_matrix(lv)
    image = np.abs(lv[:, rows + cols * dim].toarray()).sum(axis=1)
    flat = vec(labels)
    out: dict = {}
    for target in np.unique(flat[~np.isnan(flat)]):
        out[int(target)] = float(image[flat == target].sum())
    out["outside"] = float(image[np.isnan(flat)].sum())
    return out


def subset_closure_check(l0, space: CompositeSpace, k: int) -> float:
    """Largest off-``S_k`` magnitude in the image of any single ``S_k`` basis operator."""
    dim = space.dim
    labels = _subset_labels(space)
    rows, cols = np.nonzero(labels == k)
    if rows.size == 0:
        return 0.0
    lv = sp.csc_matrix(l0)
    image = np.abs(lv[:, rows + cols * dim].toarray())
    off = vec(labels != k)
    return float(image[off].sum(axis=0).max())
