from dataclasses import dataclass

import numpy as np
import pytest

from mcl.decision import Ball, Pivot, VantagePair, check_lipschitz, evaluate
from mcl.domains import KINDS, DimensionMismatch, Domain, sample_points


def test_vantage_pair_at_plus_point():
    dom = Domain("unit-cube", 3)
    a, b = sample_points(dom, 1, 2)
    f = VantagePair(dom, a, b)
    assert evaluate(f, a) == pytest.approx(-0.5 * dom.distance(a, b))
    assert evaluate(f, a) < 0


def test_vantage_pair_hand_value():
    dom = Domain("hamming", 4)
    f = VantagePair(dom, dom.point("0000"), dom.point("1111"))
    assert evaluate(f, dom.point("0011")) == 0.0


def test_ball_at_center():
    dom = Domain("sphere", 4)
    c = sample_points(dom, 2, 1)[0]
    assert evaluate(Ball(dom, c, 0.3), c) == -0.3


def test_pivot_value():
    dom = Domain("hamming", 8)
    f = Pivot(dom, dom.point("00000000"), 0.25)
    assert evaluate(f, dom.point("11100000")) == 0.125


def test_invariants():
    dom = Domain("unit-cube", 2)
    p = np.zeros(2)
    with pytest.raises(ValueError):
        VantagePair(dom, p, p.copy())
    with pytest.raises(ValueError):
        Ball(dom, p, -0.1)
    with pytest.raises(ValueError):
        Pivot(dom, p, float("nan"))
    with pytest.raises(DimensionMismatch):
        evaluate(Ball(dom, p, 0.1), np.zeros(3))


def test_pure_evaluation():
    dom = Domain("gaussian", 6)
    a, b, w = sample_points(dom, 9, 3)
    f = VantagePair(dom, a, b)
    assert evaluate(f, w) == evaluate(f, w.copy())


def _functions(dom, seed):
    a, b, c = sample_points(dom, seed, 3)
    return [VantagePair(dom, a, b), Ball(dom, c, 0.4), Pivot(dom, a, 0.37)]


@pytest.mark.parametrize("kind", KINDS)
def test_lipschitz_all_variants(kind):
    dom = Domain(kind, 70 if kind == "hamming" else 6)
    for f in _functions(dom, 3):
        assert check_lipschitz(f, seed=0, trials=20_000) <= 1e-9


@dataclass(frozen=True, eq=False)
class Doubled:
    inner: object

    @property
    def domain(self):
        return self.inner.domain

    def evaluate_many(self, points):
        return 2 * self.inner.evaluate_many(points)

    def reference_points(self):
        return self.inner.reference_points()


@pytest.mark.parametrize("kind", KINDS)
def test_corrupted_function_detected(kind):
    dom = Domain(kind, 16 if kind == "hamming" else 4)
    for f in _functions(dom, 5):
        assert check_lipschitz(Doubled(f), seed=1, trials=3000) > 0


def test_trials_must_be_positive():
    dom = Domain("hamming", 4)
    with pytest.raises(ValueError):
        check_lipschitz(Ball(dom, dom.point("0000"), 0.5), 0, 0)
