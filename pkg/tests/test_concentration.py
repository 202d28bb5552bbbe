import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcl import concentration as C
from mcl.domains import KINDS, Domain

# frozen from an independent exact binomial evaluation
HALFCUBE_50_01 = 0.05946022627971814


def _binomial_tail(d, lo):
    return float(Fraction(sum(math.comb(d, k) for k in range(lo, d + 1)), 2**d))


def test_chernoff_values():
    assert C.chernoff_okamoto_bound(0.1, 50) == pytest.approx(math.exp(-0.375), rel=1e-15)
    assert C.chernoff_okamoto_bound(0.2, 200) == pytest.approx(0.0024787521766663585, rel=1e-14)
    assert C.chernoff_okamoto_bound(1e-9, 10) == pytest.approx(1.0)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            C.chernoff_okamoto_bound(bad, 10)


def test_halfcube_values():
    assert abs(C.halfcube_alpha_exact(50, 0.1) - HALFCUBE_50_01) <= 1e-12
    assert C.halfcube_alpha_exact(2, 0.5) == 0.0
    with pytest.raises(C.GridError, match="1/50"):
        C.halfcube_alpha_exact(50, 0.011)


@pytest.mark.parametrize("d", [10, 50, 100, 200])
def test_halfcube_below_bound_on_grid(d):
    for t in range(1, d + 1):
        assert C.halfcube_alpha_exact(d, t / d) <= C.chernoff_okamoto_bound(t / d, d)


@given(d=st.integers(1, 120), t=st.integers(0, 120))
def test_halfcube_matches_binomial(d, t):
    t = min(t, d)
    assert C.halfcube_alpha_exact(d, t / d) == _binomial_tail(d, d // 2 + t + 1)


def test_curve_is_monotone():
    est = C.concentration_curve(40, [k / 40 for k in range(1, 20)], "exact_halfcube")
    assert list(est.alpha) == sorted(est.alpha, reverse=True)
    with pytest.raises(ValueError):
        C.concentration_curve(40, [0.1], "empirical_lower")


def test_empirical_matches_exact_halfcube():
    est = C.empirical_alpha_lower(Domain("hamming", 50), 0, 40_000, [0.1])
    assert abs(est.alpha[0] - HALFCUBE_50_01) <= 3 * est.stderr[0] + 1e-9
    assert est.witness[0] in ("coordinate-sum", "distance-to-point")


def test_empirical_beyond_diameter_is_zero():
    for kind in ("hamming", "unit-cube", "sphere"):
        dom = Domain(kind, 10)
        assert C.empirical_alpha_lower(dom, 1, 2000, [1.5 * dom.diameter]).alpha == (0.0,)


def test_sphere_concentrates_with_dimension():
    lo = C.empirical_alpha_lower(Domain("sphere", 64), 2, 20_000, [0.2])
    hi = C.empirical_alpha_lower(Domain("sphere", 16), 2, 20_000, [0.2])
    assert lo.alpha[0] < hi.alpha[0]


@pytest.mark.parametrize("kind", KINDS)
def test_empirical_monotone(kind):
    d = 30
    grid = [k / d for k in range(1, 10)] if kind == "hamming" else [0.02 * k for k in range(1, 10)]
    est = C.empirical_alpha_lower(Domain(kind, d), 3, 5000, grid)
    for a, b, s in zip(est.alpha, est.alpha[1:], est.stderr):
        assert b <= a + 3 * s + 1e-12
    assert all(0 <= a <= 1 for a in est.alpha)


def test_empirical_needs_samples():
    with pytest.raises(ValueError):
        C.empirical_alpha_lower(Domain("hamming", 8), 0, 999, [0.125])


def test_subspace_bound():
    assert C.subspace_alpha_bound(0.01, 0.5) == 0.02
    assert C.subspace_alpha_bound(0.5, 0.25) == 1.0
    assert C.subspace_alpha_bound(0.0, 0.3) == 0.0
    with pytest.raises(ValueError):
        C.subspace_alpha_bound(0.1, 0.0)


@pytest.mark.parametrize("m, met, exc", [(4, 1, 0.25), (100, 5, 0.05), (10_000, 50, 0.005)])
def test_bin_access(m, met, exc):
    p = C.bin_access_prediction(m)
    assert p["min_bins_met"] == pytest.approx(met) and p["exceptional_measure"] == pytest.approx(exc)


def test_bin_access_guard():
    with pytest.raises(ValueError):
        C.bin_access_prediction(3.9)


def test_neighbourhood_whole_space():
    assert C.neighborhood_measure(Domain("unit-cube", 4), C.whole_space(Domain("unit-cube", 4)), 0.1, 100, 0).value == 1.0


def test_neighbourhood_of_halfcube():
    dom = Domain("hamming", 50)
    est = C.neighborhood_measure(dom, C.halfcube_set(dom), 0.1, 40_000, 1)
    assert abs(est.value - (1 - HALFCUBE_50_01)) <= 3 * est.stderr


def test_neighbourhood_witness_sample_and_empty():
    dom = Domain("hamming", 12)
    exact = C.hamming_weight_set(dom, at_most=6)
    sampled = C.TargetSet(exact.name, exact.contains)  # same name, same sample stream
    a = C.neighborhood_measure(dom, exact, 1 / 12, 4000, 2).value
    b = C.neighborhood_measure(dom, sampled, 1 / 12, 4000, 2).value
    assert b <= a + 1e-12 and b > 0.5
    with pytest.raises(C.EmptyWitness):
        C.neighborhood_measure(dom, C.TargetSet("never", lambda p: np.zeros(len(p), bool)), 0.1, 500, 0)


def test_gromov_milman_implication():
    dom = Domain("hamming", 60)
    gamma = 10 / 60
    alpha = C.chernoff_okamoto_bound(gamma, 60)
    target = C.hamming_weight_set(dom, at_least=32)  # measure ~0.35 > alpha ~0.29
    res = C.gromov_milman_check(dom, target, gamma, alpha, 20_000, 3)
    assert res["hypothesis"]
    assert res["conclusion"]


def test_entropy_radius_oracle():
    # independently solved values
    assert C.entropy_radius(256, 64) == pytest.approx(0.2949, abs=1e-4)
    assert C.entropy_radius(4096, 144) == pytest.approx(0.3317, abs=1e-4)
    assert C.entropy_radius(65536, 256) == pytest.approx(0.3539, abs=1e-4)


def test_nn_radius_two_points():
    st_ = C.nn_radius_stats(Domain("unit-cube", 3), 2, 50, 0)
    assert st_.p10 <= st_.median <= st_.p90 and st_.occupancy >= 1
    with pytest.raises(ValueError):
        C.nn_radius_stats(Domain("unit-cube", 3), 1, 50, 0)


def test_nn_radius_against_exact_distribution():
    # min of n iid Bin(64, 1/2)/64: exact quantiles 0.296875 / 0.328125 / 0.359375
    st_ = C.nn_radius_stats(Domain("hamming", 64), 256, 500, 0)
    assert abs(st_.median - 0.328125) <= 2 / 64
    assert abs(st_.p10 - 0.296875) <= 2 / 64 and abs(st_.p90 - 0.359375) <= 2 / 64


@pytest.mark.parametrize("kind", ["unit-cube", "gaussian", "sphere"])
def test_occupancy_cap_continuous(kind):
    assert C.nn_radius_stats(Domain(kind, 16), 1024, 200, 0).occupancy <= 4


def test_occupancy_cap_hamming():
    assert C.nn_radius_stats(Domain("hamming", 64), 256, 300, 0).occupancy <= 6
