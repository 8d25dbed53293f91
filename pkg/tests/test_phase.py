import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (
    brute_relative_phase,
    brute_single_phase,
    radial_husimi_quad,
    radial_wigner_series,
    theta_spin_quad,
)
from qsync.hilbert import CompositeSpace, SystemSpec
from qsync.phase import (
    METHODS,
    MethodError,
    harmonic_coefficients,
    hybrid_weight,
    phase_grid,
    radial_weight_husimi,
    radial_weight_wigner,
    relative_phase_distribution,
    single_phase_distribution,
    theta_weight_spin,
    weight_matrix,
)

CV2 = SystemSpec("cv", n_max=2)
SPIN1 = SystemSpec("spin", s=1)


def random_state(r, d, rank=None):
    rank = rank or d
    g = r.normal(size=(d, rank)) + 1j * r.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


# --------------------------------------------------------------------------- weights


def test_rw_one_zero_closed_form():
    # r_w(1,0) = sqrt(pi/2) from a Gaussian moment
    assert radial_weight_wigner(1, 0) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-12)
    assert radial_weight_wigner(1, 0) == pytest.approx(1.2533141373155003, abs=1e-12)


def test_rw_matches_series_oracle():
    err = max(abs(radial_weight_wigner(m, n) - radial_wigner_series(m, n)) for m in range(21) for n in range(21))
    assert err < 1e-10


def test_rq_closed_forms():
    assert radial_weight_husimi(0, 2) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    assert radial_weight_husimi(0, 1) == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-14)
    for m in range(8):
        for n in range(8):
            assert radial_weight_husimi(m, n) == pytest.approx(radial_husimi_quad(m, n), rel=1e-11)


def test_tq_closed_form_and_quadrature():
    assert theta_weight_spin(1, 1, 0) == pytest.approx(math.sqrt(2) * math.pi / 8, abs=1e-14)
    for s in (0.5, 1, 1.5, 2, 3):
        labels = s - np.arange(int(2 * s) + 1)
        for m in labels:
            for n in labels:
                assert theta_weight_spin(s, m, n) == pytest.approx(theta_spin_quad(s, m, n), abs=1e-12)


def test_hybrid_weight_identities():
    val = hybrid_weight(0, 2, 1, 1, -1)
    assert val == pytest.approx(radial_husimi_quad(0, 2) * theta_spin_quad(1, 1, -1), abs=1e-12)
    for mo in range(4):
        for ms in (1, 0, -1):
            assert hybrid_weight(mo, mo, 1, ms, ms) == pytest.approx(2 / 3, abs=1e-12)
    assert hybrid_weight(1, 3, 1, 0, -1) == pytest.approx(hybrid_weight(3, 1, 1, -1, 0), abs=1e-15)


def test_weight_argument_validation():
    with pytest.raises(ValueError):
        radial_weight_wigner(-1, 0)
    with pytest.raises(ValueError):
        theta_weight_spin(1, 2, 0)
    with pytest.raises(ValueError):
        theta_weight_spin(1, 0.5, 0)


# --------------------------------------------------------------------------- single system


def test_fock_state_is_uniform():
    rho = np.zeros((4, 4))
    rho[2, 2] = 1
    for m in METHODS:
        d = single_phase_distribution(rho, SystemSpec("cv", n_max=3), m)
        assert np.abs(d.values - 1 / (2 * math.pi)).max() < 1e-15


def test_superposition_phase_states():
    rho = np.full((2, 2), 0.5)
    d = single_phase_distribution(rho, SystemSpec("cv", n_max=1), "phase_states")
    np.testing.assert_allclose(d.values, (1 + np.cos(d.phi)) / (2 * math.pi), atol=1e-15)
    assert d.amplitude(1) == pytest.approx(0.5) and d.phase(1) == 0


def test_superposition_wigner():
    rho = np.full((2, 2), 0.5)
    d = single_phase_distribution(rho, SystemSpec("cv", n_max=1), "wigner")
    rw = radial_weight_wigner(1, 0)
    # 1/2pi + (r_w/2pi) cos(phi): amplitude A_1 = r_w/2 with the 1/pi prefactor
    np.testing.assert_allclose(d.values, 1 / (2 * math.pi) + rw / (2 * math.pi) * np.cos(d.phi), atol=1e-14)
    assert d.amplitude(1) == pytest.approx(0.62666, abs=1e-5)
    assert d.phi[np.argmax(d.values)] == 0


@pytest.mark.parametrize("spec", [SystemSpec("cv", n_max=4), SystemSpec("spin", s=1.5), SystemSpec("qubit")])
@pytest.mark.parametrize("method", METHODS)
def test_single_distribution_matches_oracle(spec, method, rng):
    if spec.kind == "spin" and method == "wigner":
        with pytest.raises(MethodError):
            single_phase_distribution(np.eye(spec.dim) / spec.dim, spec, method)
        return
    rho = random_state(rng, spec.dim)
    d = single_phase_distribution(rho, spec, method, 64)
    assert np.abs(d.values - brute_single_phase(rho, spec, method, d.phi)).max() < 1e-12
    assert d.integral() == pytest.approx(1, abs=1e-12)


# --------------------------------------------------------------------------- pairs


PAIRS = {
    "cv_cv": (SystemSpec("cv", n_max=3), SystemSpec("cv", n_max=2)),
    "qubit_cv": (SystemSpec("qubit"), SystemSpec("cv", n_max=2)),
    "spin_spin": (SystemSpec("spin", s=1), SystemSpec("spin", s=1.5)),
    "hybrid": (SystemSpec("cv", n_max=3), SystemSpec("spin", s=1)),
}


@pytest.mark.parametrize("pair", sorted(PAIRS))
@pytest.mark.parametrize("method", METHODS)
def test_relative_distribution_matches_brute_marginal(pair, method, rng):
    specs = PAIRS[pair]
    space = CompositeSpace(specs)
    rho = random_state(rng, space.dim)
    if method == "wigner" and space.pair_type != "cv_cv":
        with pytest.raises(MethodError):
            relative_phase_distribution(rho, space, method)
        return
    d = relative_phase_distribution(rho, space, method, 48)
    ref = brute_relative_phase(rho, specs, method, d.phi)
    assert np.abs(d.values - ref).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.sampled_from(["husimi", "phase_states"]), st.integers(0, 2**32 - 1))
def test_normalization_and_reality(pair, method, seed):
    space = CompositeSpace(PAIRS[pair])
    rho = random_state(np.random.default_rng(seed), space.dim)
    d = relative_phase_distribution(rho, space, method, 128)
    assert abs(d.integral() - 1) < 1e-8
    assert abs(d.shifted().sum() * 2 * math.pi / d.values.size) < 1e-10
    # the complex harmonic sum, before taking the real part
    full = np.full(d.phi.shape, 1 / (2 * math.pi), dtype=complex)
    for k, c in d.coefficients.items():
        full += d.prefactor / 2 * (c * np.exp(-1j * d.sign * k * d.phi) + np.conj(c) * np.exp(1j * d.sign * k * d.phi))
    assert np.abs(full.imag).max() <= 1e-12


def test_diagonal_state_is_uniform(rng):
    for specs in PAIRS.values():
        space = CompositeSpace(specs)
        rho = np.diag(rng.dirichlet(np.ones(space.dim)))
        for m in METHODS:
            if m == "wigner" and space.pair_type != "cv_cv":
                continue
            d = relative_phase_distribution(rho, space, m)
            assert np.abs(d.values - 1 / (2 * math.pi)).max() < 1e-15


def test_two_qubit_coherence_phase_states():
    q = SystemSpec("qubit")
    space = CompositeSpace((q, q))
    c = 0.3
    rho = np.diag([0.1, 0.45, 0.45, 0.0]).astype(complex)
    rho[2, 1] = rho[1, 2] = c  # <1,0|rho|0,1>
    d = relative_phase_distribution(rho, space, "phase_states")
    np.testing.assert_allclose(d.values, 1 / (2 * math.pi) + c / math.pi * np.cos(d.phi), atol=1e-15)


def test_spin_pair_excitation_relation():
    space = CompositeSpace((SPIN1, SPIN1))

    def ket(pairs):
        v = np.zeros(9, dtype=complex)
        for m1, m2 in pairs:
            v[space.index(int(1 - m1), int(1 - m2))] = 1
        return v / np.linalg.norm(v)

    inside = ket([(1, -1), (0, 0), (-1, 1)])
    outside = ket([(1, 1), (0, 0), (-1, -1)])
    for m in ("husimi", "phase_states"):
        d_in = relative_phase_distribution(np.outer(inside, inside.conj()), space, m)
        d_out = relative_phase_distribution(np.outer(outside, outside.conj()), space, m)
        assert d_in.shifted().max() > 1e-2
        assert np.abs(d_out.shifted()).max() < 1e-15


def test_prefactors_and_weights():
    space = CompositeSpace((SPIN1, SystemSpec("spin", s=1.5)))
    d = relative_phase_distribution(np.eye(12) / 12, space, "husimi")
    assert d.prefactor == pytest.approx(3 * 4 / (4 * math.pi)) and d.sign == -1
    hyb = CompositeSpace((CV2, SPIN1))
    d = relative_phase_distribution(np.eye(9) / 9, hyb, "husimi")
    assert d.prefactor == pytest.approx(3 / (2 * math.pi)) and d.sign == 1
    assert np.all(weight_matrix(CompositeSpace((CV2, CV2)), "phase_states") == 1)
    with pytest.raises(MethodError):
        harmonic_coefficients(np.eye(9) / 9, hyb, "wigner")
    with pytest.raises(MethodError):
        relative_phase_distribution(np.eye(9) / 9, hyb, "glauber")


def test_grid():
    g = phase_grid(8)
    assert g[0] == 0 and g[-1] < 2 * math.pi and len(g) == 8
    with pytest.raises(ValueError):
        phase_grid(2)
