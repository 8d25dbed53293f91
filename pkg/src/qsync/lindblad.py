"""Liouvillian assembly and steady-state solution.

Vectorization is column stacking everywhere: ``vec(X) = X.ravel(order="F")``
and ``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .hilbert import SystemSpec

#: Dense SVD kernel check is run up to this Liouvillian size (D**2).
DENSE_KERNEL_CHECK = 400


class SolverError(RuntimeError):
    """Steady-state residual above tolerance or the linear solve failed."""


class DegenerateSteadyStateError(SolverError):
    """The Liouvillian kernel is more than one-dimensional."""


@dataclass(frozen=True)
class Dissipator:
    rate: float
    jump_operator: np.ndarray

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("dissipator rate must be non-negative")


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).ravel(order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape((dim, dim), order="F")


def hamiltonian_part(h) -> sp.csr_matrix:
    """``-i[H, .]`` as a sparse superoperator."""
    h = sp.csr_matrix(h)
    eye = sp.identity(h.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(eye, h) - sp.kron(h.T, eye))).tocsr()


def dissipator_part(op, rate: float = 1.0) -> sp.csr_matrix:
    """``rate * D[op]`` with ``D[O]X = O X O^dag - {O^dag O, X}/2``."""
    o = sp.csr_matrix(op)
    eye = sp.identity(o.shape[0], dtype=complex, format="csr")
    odo = (o.conj().T @ o).tocsr()
    sup = sp.kron(o.conj(), o) - 0.5 * sp.kron(eye, odo) - 0.5 * sp.kron(odo.T, eye)
    return (rate * sup).tocsr()


def build_liouvillian(h, dissipators) -> sp.csr_matrix:
    """Sparse Lindblad generator for Hamiltonian ``h`` and ``dissipators``.

    Parameters
    ----------
    h : (D, D) array_like
        Hermitian Hamiltonian (hbar = 1).
    dissipators : iterable of Dissipator

    Returns
    -------
    scipy.sparse.csr_matrix
        ``D**2 x D**2`` superoperator acting on column-stacked operators.
    """
    h = np.asarray(h.toarray() if sp.issparse(h) else h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("Hamiltonian must be square")
    if np.abs(h - h.conj().T).max(initial=0.0) > 1e-10:
        raise ValueError("Hamiltonian is not Hermitian")
    dim = h.shape[0]
    lv = hamiltonian_part(h)
    for d in dissipators:
        op = d.jump_operator
        if op.shape != (dim, dim):
            raise ValueError(
                f"jump operator shape {op.shape} does not match Hamiltonian dimension {dim}"
            )
        if d.rate:
            lv = lv + dissipator_part(op, d.rate)
    return lv.tocsr()


def adjoint_identity_residual(lv) -> float:
    """``max |L^dag(vec I)|``; zero for trace-preserving generators."""
    dim = int(round(np.sqrt(lv.shape[0])))
    v = lv.conj().T @ vec(np.eye(dim, dtype=complex))
    return float(np.abs(v).max())


def _trace_row(dim: int) -> np.ndarray:
    return np.arange(dim) * (dim + 1)


def population_sector(lv) -> np.ndarray:
    """Indices of ``vec`` components connected to any population.

    The sparsity graph of ``L`` splits into independent blocks; blocks that
    contain no diagonal element cannot carry trace and, for a unique steady
    state, are zero.
    """
    lv = sp.csr_matrix(lv)
    dim = int(round(np.sqrt(lv.shape[0])))
    pattern = abs(lv) + abs(lv).T
    _, comp = connected_components(pattern, directed=False)
    wanted = np.unique(comp[_trace_row(dim)])
    return np.flatnonzero(np.isin(comp, wanted))


def _solve_with_row(block: sp.csr_matrix, diag_pos: np.ndarray, which: int) -> np.ndarray:
    n = block.shape[0]
    row = diag_pos[which]
    keep = np.ones(n)
    keep[row] = 0.0
    trace = sp.csr_matrix(
        (np.ones(diag_pos.size, dtype=complex), (np.full(diag_pos.size, row), diag_pos)), shape=(n, n)
    )
    a = (sp.diags(keep) @ block + trace).tocsc()
    rhs = np.zeros(n, dtype=complex)
    rhs[row] = 1.0
    try:
        lu = spla.splu(a, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(f"trace-constrained system is singular: {exc}")
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError("trace-constrained system is singular")
    return x


def steady_state(lv, *, tol: float = 1e-9, check_kernel: bool = True) -> np.ndarray:
    """Unique steady state of a Liouvillian.

    The solve is restricted to the blocks of ``L`` that touch populations.
    Within them one population equation is replaced by the trace condition
    and the sparse system is solved by LU; the result is Hermitian
    symmetrized.  The kernel check is best effort: a dense singular-value
    test for small generators and, otherwise, agreement between two solves
    that replace different population rows.
    """
    lv = sp.csr_matrix(lv)
    dim = int(round(np.sqrt(lv.shape[0])))
    if dim * dim != lv.shape[0]:
        raise ValueError("superoperator size is not a perfect square")

    if check_kernel and lv.shape[0] <= DENSE_KERNEL_CHECK:
        sv = la.svdvals(lv.toarray())
        if sv.size > 1 and sv[-2] < 1e-8:
            raise DegenerateSteadyStateError(
                f"second smallest singular value {sv[-2]:.3e} below 1e-8"
            )

    sel = population_sector(lv)
    block = lv[sel][:, sel].tocsr()
    diag_pos = np.searchsorted(sel, _trace_row(dim))
    x_sel = _solve_with_row(block, diag_pos, 0)
    if check_kernel and lv.shape[0] > DENSE_KERNEL_CHECK and dim > 1:
        other = _solve_with_row(block, diag_pos, dim - 1)
        if np.abs(other - x_sel).max() > 1e-6 * max(1.0, np.abs(x_sel).max()):
            raise DegenerateSteadyStateError("solutions depend on the replaced row")

    x = np.zeros(dim * dim, dtype=complex)
    x[sel] = x_sel
    rho = unvec(x, dim)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real

    residual = np.abs(lv @ vec(rho)).max()
    if not residual <= tol:
        raise SolverError(f"steady-state residual {residual:.3e} exceeds {tol:.1e}")
    return rho


def dense_null_vector(lv) -> np.ndarray:
    """Steady state from a dense eigendecomposition (reference path)."""
    m = lv.toarray() if sp.issparse(lv) else np.asarray(lv)
    dim = int(round(np.sqrt(m.shape[0])))
    w, v = la.eig(m)
    x = v[:, np.argmin(np.abs(w))]
    rho = unvec(x, dim)
    rho = rho / np.trace(rho)
    return (rho + rho.conj().T) / 2


def truncation_check(rho, space, tail_levels: int = 2) -> float:
    """Largest population held by the top ``tail_levels`` Fock states.

    ``space`` is a :class:`CompositeSpace` or a single :class:`SystemSpec`.
    Only truncated oscillators (``kind="cv"``) are inspected; spins and
    dissipative-limit qubits are exact and contribute zero.
    """
    rho = np.asarray(rho)
    pops = np.real(np.diag(rho))
    if isinstance(space, SystemSpec):
        if space.kind != "cv":
            return 0.0
        return float(max(pops[-tail_levels:].sum(), 0.0))
    d1, d2 = space.dims
    p = pops.reshape(d1, d2)
    worst = 0.0
    for axis, spec in enumerate(space.specs):
        if spec.kind != "cv":
            continue
        marginal = p.sum(axis=1 - axis)
        worst = max(worst, float(marginal[-tail_levels:].sum()))
    return worst
