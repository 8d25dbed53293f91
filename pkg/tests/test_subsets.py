import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from conftest import config_state
from qsync.hilbert import CompositeSpace, SystemSpec
from qsync.phase import METHODS, relative_phase_distribution
from qsync.subsets import (
    coherence_mass,
    dominant_mode,
    harmonic_report,
    mask_coherences,
    peak_positions,
    subset_coefficient,
    subset_mask,
    subset_members,
    sync_measure,
)
from test_phase import PAIRS, random_state

TWO_PI = 2 * math.pi


def _methods(space):
    return [m for m in METHODS if m != "wigner" or space.pair_type == "cv_cv"]


def test_diagonal_state_members_are_zero():
    space = CompositeSpace((SystemSpec("cv", n_max=2), SystemSpec("cv", n_max=2)))
    members = subset_members(np.eye(9) / 9, space, 1)
    assert members and all(m.value == 0 for m in members)
    for m in members:
        assert m.m1 - m.n1 == 1 and m.m1 + m.m2 == m.n1 + m.n2


def test_hybrid_members_follow_difference_relation():
    space = CompositeSpace(PAIRS["hybrid"])
    for k in range(0, 3):
        for m in subset_members(np.eye(space.dim), space, k):
            assert m.m1 - m.n1 == k
            assert m.m1 - m.m2 == m.n1 - m.n2


@pytest.mark.parametrize("pair", sorted(PAIRS))
def test_subsets_partition_the_matrix(pair):
    space = CompositeSpace(PAIRS[pair])
    kmax = space.max_harmonic()
    count = sum(len(subset_members(np.eye(space.dim), space, k)) for k in range(-kmax - 2, kmax + 3))
    outside = int((~space.excitation_mask()).sum())
    assert count + outside == space.dim**2


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2**32 - 1))
def test_conjugate_subsets_and_triangle_bound(pair, seed):
    space = CompositeSpace(PAIRS[pair])
    rho = random_state(np.random.default_rng(seed), space.dim)
    for method in _methods(space):
        report = harmonic_report(rho, space, method, 64)
        for e in report.entries:
            assert e.amplitude <= e.magnitude_sum + 1e-15
            neg = subset_coefficient(rho, space, method, -e.k)
            assert abs(neg - np.conj(e.coefficient)) < 1e-12


def test_dominant_mode_tie_break():
    assert dominant_mode({1: 0.2, 2: 0.2 + 1e-13, 3: 0.1}) == 1
    assert dominant_mode({1: 0.1, 2: 0.3}) == 2
    assert dominant_mode({1: 0.0, 2: 1e-14}) == 0
    assert dominant_mode({}) == 0


def test_sync_measure_values():
    space = CompositeSpace((SystemSpec("qubit"), SystemSpec("qubit")))
    d = relative_phase_distribution(np.eye(4) / 4, space, "phase_states")
    assert abs(sync_measure(d)) < 1e-12
    rho = np.diag([0.0, 0.5, 0.5, 0.0]).astype(complex)
    rho[2, 1] = rho[1, 2] = 0.5
    # P = (1 + cos phi)/2pi, whose maximum excess is 1/2pi
    d = relative_phase_distribution(rho, space, "phase_states")
    assert sync_measure(d) == pytest.approx(1 / TWO_PI, abs=1e-15)
    assert peak_positions(d) == pytest.approx([0.0], abs=1e-8)


def test_peak_refinement_off_grid():
    space = CompositeSpace((SystemSpec("qubit"), SystemSpec("qubit")))
    rho = np.diag([0.0, 0.5, 0.5, 0.0]).astype(complex)
    rho[2, 1] = 0.5 * np.exp(0.3001j)
    rho[1, 2] = np.conj(rho[2, 1])
    d = relative_phase_distribution(rho, space, "phase_states", 64)
    assert peak_positions(d) == pytest.approx([0.3001], abs=1e-7)


def test_no_signal_has_no_peaks():
    space = CompositeSpace(PAIRS["cv_cv"])
    report = harmonic_report(np.eye(space.dim) / space.dim, space, "husimi")
    assert report.k_d == 0 and peak_positions(report) == []


def test_report_serialization_round_trip():
    cfg, space, rho = config_state("spin_asymmetric")
    report = harmonic_report(rho, space, "husimi")
    doc = json.loads(json.dumps(report.to_dict()))
    assert set(doc) >= {"pair_type", "k_d", "S_m", "subsets"}
    assert doc["pair_type"] == "spin_spin"
    for sub in doc["subsets"]:
        assert set(sub) >= {"k", "members", "C_re", "C_im", "A", "theta", "L"}
        for m in sub["members"]:
            assert space.index(int(1 - m["m1"]), int(1 - m["m2"])) == m["row"]
            assert {"grouped_row", "grouped_col", "re", "im"} <= set(m)
    assert doc["k_d"] == report.k_d == 1


# --------------------------------------------------------------------------- shipped scenarios


def test_coherent_pair_subset_content():
    _, space, rho = config_state("exchange_pair")
    s1 = [m.value for m in subset_members(rho, space, 1)]
    s2 = [m.value for m in subset_members(rho, space, 2)]
    assert max(map(abs, s1)) > 1e-3 and max(map(abs, s2)) > 1e-3
    inside, outside = coherence_mass(rho, space)
    assert inside > 0 and outside < 1e-12


def test_squeezed_pair_subsets_empty():
    _, space, rho = config_state("squeezed_pair")
    for k in range(1, space.max_harmonic() + 1):
        assert max(abs(m.value) for m in subset_members(rho, space, k)) < 1e-10
    assert coherence_mass(rho, space)[1] > 1e-3


def test_coherent_pair_destructive_first_harmonic():
    _, space, rho = config_state("exchange_pair")
    rep = harmonic_report(rho, space, "phase_states")
    assert rep.entry(1).amplitude <= 1e-8 and rep.entry(1).magnitude_sum > 1e-4
    assert rep.k_d == 2


def test_dissipative_pair_first_harmonic():
    _, space, rho = config_state("dissipative_pair")
    assert harmonic_report(rho, space, "phase_states").k_d == 1


@pytest.mark.parametrize("name", ["exchange_pair", "dissipative_pair", "spin_asymmetric", "hybrid_antijc", "spin_interference"])
def test_zeroing_dominant_subset_lowers_sync(name):
    _, space, rho = config_state(name)
    for method in _methods(space):
        rep = harmonic_report(rho, space, method)
        cut = rho.copy()
        mask = subset_mask(space, rep.k_d)
        cut[mask | mask.T] = 0
        cut[np.diag_indices_from(cut)] = np.diag(rho)
        assert harmonic_report(cut, space, method).sync_measure < rep.sync_measure


@pytest.mark.parametrize("name", ["exchange_pair", "dissipative_pair", "spin_asymmetric", "spin_interference"])
def test_phase_state_measure_matches_analytic_maximum(name):
    _, space, rho = config_state(name)
    rep = harmonic_report(rho, space, "phase_states")
    dist = rep.distribution

    def neg(x):
        return -sum(
            abs(c) * math.cos(k * x - dist.sign * np.angle(c)) for k, c in dist.coefficients.items()
        ) / math.pi

    grid = dist.phi
    best = min(grid, key=neg)
    step = grid[1] - grid[0]
    res = optimize.minimize_scalar(neg, bounds=(best - step, best + step), method="bounded",
                                   options={"xatol": 1e-12})
    # grid maximum within the curvature-limited gap of the continuous one
    assert -res.fun - rep.sync_measure <= 1e-10 + 0.5 * step**2 * sum(
        k * k * abs(c) for k, c in dist.coefficients.items()) / math.pi
    assert abs(-neg(best) - rep.sync_measure) < 1e-10


def test_coherent_peaks_zero_and_pi():
    _, space, rho = config_state("exchange_pair")
    for m in METHODS:
        peaks = peak_positions(harmonic_report(rho, space, m))
        assert peaks == pytest.approx([0.0, math.pi], abs=0.05)


def test_single_peak_at_pi():
    for name in ("dissipative_pair", "spin_asymmetric"):
        _, space, rho = config_state(name)
        for m in _methods(space):
            assert peak_positions(harmonic_report(rho, space, m)) == pytest.approx([math.pi], abs=0.05)


def test_masking_helper():
    _, space, rho = config_state("squeezed_pair")
    inside = mask_coherences(rho, space, "inside")
    outside = mask_coherences(rho, space, "outside")
    np.testing.assert_array_equal(np.diag(inside), np.diag(rho))
    np.testing.assert_array_equal(np.diag(outside), np.diag(rho))
    assert coherence_mass(inside, space)[1] == 0
    assert coherence_mass(outside, space)[0] == 0
    with pytest.raises(ValueError):
        mask_coherences(rho, space, "both")
