"""Relative and single-system phase distributions from harmonic coefficients.

Every distribution here has the closed form

    P(phi) = 1/(2 pi) + prefactor * sum_k A_k cos(k phi - sign * theta_k),

with ``C_k = A_k exp(i theta_k)`` a weighted sum over the coherences that
feed the ``k``-th harmonic.  Oscillators and the hybrid use ``sign=+1``;
spins use ``sign=-1`` because the spin coherent state carries
``exp(-i m phi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .hilbert import CompositeSpace, SystemSpec

METHODS = ("wigner", "husimi", "phase_states")
DEFAULT_GRID_POINTS = 512


class MethodError(ValueError):
    """Phase method not defined for the given system or pair type."""


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _radial_weight_wigner(m: int, n: int) -> float:
    alpha = m - n
    p = m + n + 2
    upper = 1.0
    while math.exp(-upper * upper) * upper**p >= 1e-16:
        upper += 0.5

    norm = 2.0 * (-1) ** n * math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)))

    def integrand(r):
        return r * (math.sqrt(2.0) * r) ** alpha * special.eval_genlaguerre(n, alpha, 2 * r * r) * math.exp(-r * r)

    val, err = integrate.quad(integrand, 0.0, upper, epsabs=1e-13, epsrel=1e-13, limit=400)
    if err * abs(norm) > 1e-10:
        raise QuadratureError(f"r_w({m},{n}) quadrature error estimate {err:.2e}")
    return norm * val


def radial_weight_wigner(m: int, n: int) -> float:
    """Radial integral ``r_w(m, n)`` of the Fock-basis Wigner kernel ``W_mn``.

    Evaluated by adaptive quadrature for ``m >= n`` and extended by the
    symmetry ``r_w(m, n) = r_w(n, m)``.
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    m, n = int(m), int(n)
    return _radial_weight_wigner(max(m, n), min(m, n))


@lru_cache(maxsize=None)
def radial_weight_husimi(m: int, n: int) -> float:
    """``r_q(m, n) = Gamma((m+n)/2 + 1) / sqrt(m! n!)``."""
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    return math.exp(math.lgamma((m + n) / 2 + 1) - 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1)))


def _twice(x: float) -> int:
    t = round(2 * x)
    if abs(2 * x - t) > 1e-9:
        raise ValueError(f"{x} is not a half-integer")
    return int(t)


@lru_cache(maxsize=None)
def _theta_weight(two_s: int, two_m: int, two_n: int) -> float:
    if abs(two_m) > two_s or abs(two_n) > two_s or (two_s - two_m) % 2 or (two_s - two_n) % 2:
        raise ValueError("spin projection out of range")
    sm = (two_s + two_m) // 2
    sn = (two_s + two_n) // 2
    log_binom = 0.5 * (
        math.lgamma(two_s + 1) * 2
        - math.lgamma(sm + 1) - math.lgamma(two_s - sm + 1)
        - math.lgamma(sn + 1) - math.lgamma(two_s - sn + 1)
    )
    a = two_s / 2 + (two_m + two_n) / 4 + 1
    b = two_s / 2 - (two_m + two_n) / 4 + 1
    return 2.0 * math.exp(log_binom + special.betaln(a, b))


def theta_weight_spin(s: float, m: float, n: float) -> float:
    """``t_q(m, n)``, the polar integral of two spin coherent-state amplitudes."""
    return _theta_weight(_twice(s), _twice(m), _twice(n))


def hybrid_weight(m_o: int, n_o: int, s: float, m_s: float, n_s: float) -> float:
    return radial_weight_husimi(m_o, n_o) * theta_weight_spin(s, m_s, n_s)


def _weight_table(spec: SystemSpec, method: str) -> np.ndarray:
    d = spec.dim
    if method == "phase_states":
        return np.ones((d, d))
    if spec.is_oscillator:
        fn = radial_weight_wigner if method == "wigner" else radial_weight_husimi
        return np.array([[fn(i, j) for j in range(d)] for i in range(d)])
    if method == "wigner":
        raise MethodError("Wigner weights are only defined for oscillators")
    labels = spec.labels()
    return np.array([[theta_weight_spin(spec.s, x, y) for y in labels] for x in labels])


def weight_matrix(space: CompositeSpace, method: str) -> np.ndarray:
    """Element weights ``R_w``, ``R_q``, ``T_q``, ``I_q`` or 1 in lexicographic order."""
    _check_pair_method(space.pair_type, method)
    a, b = space.specs
    return np.kron(_weight_table(a, method), _weight_table(b, method))


def _check_pair_method(pair_type: str, method: str) -> None:
    if method not in METHODS:
        raise MethodError(f"unknown phase method {method!r}")
    if method == "wigner" and pair_type != "cv_cv":
        raise MethodError(f"wigner method is not available for {pair_type} pairs")


def pair_prefactor(space: CompositeSpace, method: str) -> tuple[float, int]:
    """``(prefactor, sign)`` of the harmonic sum for a pair."""
    pt = space.pair_type
    if method == "phase_states" or pt == "cv_cv":
        return 1 / math.pi, (-1 if pt == "spin_spin" else 1)
    if pt == "spin_spin":
        c1, c2 = (spec.dim for spec in space.specs)
        return c1 * c2 / (4 * math.pi), -1
    return space.specs[1].dim / (2 * math.pi), 1


@dataclass
class PhaseDistribution:
    method: str
    coefficients: dict[int, complex]
    prefactor: float
    sign: int = 1
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def amplitude(self, k: int) -> float:
        return abs(self.coefficients.get(k, 0.0))

    def phase(self, k: int) -> float:
        return float(np.angle(self.coefficients.get(k, 0.0)))

    def evaluate(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        out = np.full(phi.shape, 1 / (2 * math.pi))
        for k, c in self.coefficients.items():
            # Re(C e^{-i sign k phi}) = A cos(k phi - sign theta)
            out = out + self.prefactor * np.real(c * np.exp(-1j * self.sign * k * phi))
        return out

    def derivative(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(phi.shape)
        for k, c in self.coefficients.items():
            out = out + self.prefactor * np.real(-1j * self.sign * k * c * np.exp(-1j * self.sign * k * phi))
        return out

    def shifted(self) -> np.ndarray:
        return self.values - 1 / (2 * math.pi)

    def integral(self) -> float:
        """Rectangle rule on the periodic grid; exact for trigonometric polynomials."""
        return float(self.values.sum() * 2 * math.pi / self.values.size)


def phase_grid(grid_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    return 2 * math.pi * np.arange(grid_points) / grid_points


def harmonic_coefficients(rho, space: CompositeSpace, method: str) -> dict[int, complex]:
    """``C_k`` for ``k = 1 .. k_max``, weighted sums over the excitation subsets."""
    _check_pair_method(space.pair_type, method)
    rho = np.asarray(rho)
    mask = space.excitation_mask()
    kmat = space.offset_matrix()
    weighted = rho * weight_matrix(space, method)
    return {
        k: complex(weighted[mask & (kmat == k)].sum())
        for k in range(1, space.max_harmonic() + 1)
    }


def relative_phase_distribution(
    rho, space: CompositeSpace, method: str, grid_points: int = DEFAULT_GRID_POINTS
) -> PhaseDistribution:
    """Relative phase distribution ``P(phi_1 - phi_2)`` of a joint state."""
    coeffs = harmonic_coefficients(rho, space, method)
    pref, sign = pair_prefactor(space, method)
    dist = PhaseDistribution(method, coeffs, pref, sign)
    dist.phi = phase_grid(grid_points)
    dist.values = dist.evaluate(dist.phi)
    return dist


def single_phase_distribution(
    rho, spec: SystemSpec, method: str, grid_points: int = DEFAULT_GRID_POINTS
) -> PhaseDistribution:
    """Phase distribution of one oscillator or spin; every coherence contributes."""
    if method not in METHODS:
        raise MethodError(f"unknown phase method {method!r}")
    rho = np.asarray(rho)
    weights = _weight_table(spec, method)
    labels = spec.labels()
    kmat = np.rint(labels[:, None] - labels[None, :]).astype(int)
    weighted = rho * weights
    coeffs = {k: complex(weighted[kmat == k].sum()) for k in range(1, spec.dim)}
    if spec.is_oscillator:
        pref, sign = 1 / math.pi, 1
    elif method == "husimi":
        pref, sign = spec.dim / (2 * math.pi), -1
    else:
        pref, sign = 1 / math.pi, -1
    dist = PhaseDistribution(method, coeffs, pref, sign)
    dist.phi = phase_grid(grid_points)
    dist.values = dist.evaluate(dist.phi)
    return dist
