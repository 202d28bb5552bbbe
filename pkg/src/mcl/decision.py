"""1-Lipschitz decision functions for metric-tree nodes.

Negative values route to the minus child, positive values to the plus child.
A query ball of radius ``eps`` around ``w`` can skip the minus child when
``f(w) >= eps`` and the plus child when ``f(w) <= -eps``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mcl.domains import DimensionMismatch, Domain
from mcl.rng import stream

VARIANTS = ("vantage_pair", "ball", "pivot")


def _shifted_distances(domain: Domain, p, points, level: float) -> np.ndarray:
    """``rho(p, points) - level``.

    On the Hamming cube a level sitting on the half-integer count grid is
    subtracted in raw bit units, so the result is exact up to one final
    rounding and pruning stays sound even for radii one ulp above a distance.
    """
    if domain.is_bits:
        raw_level = level * domain.d
        snapped = round(2 * raw_level) / 2
        if abs(raw_level - snapped) < 1e-9:
            return (domain.raw_distances(p, points) - snapped) / domain._denom
    return domain.distances(p, points) - level


def _as_point(domain: Domain, p) -> np.ndarray:
    p = np.asarray(p)
    if p.shape != (domain.width,):
        raise DimensionMismatch(f"expected a single point of length {domain.width}, got shape {p.shape}")
    return p


@dataclass(frozen=True, eq=False)
class VantagePair:
    """``f(w) = (rho(plus, w) - rho(minus, w)) / 2``."""

    domain: Domain
    plus: np.ndarray
    minus: np.ndarray

    variant = "vantage_pair"

    def __post_init__(self):
        _as_point(self.domain, self.plus)
        _as_point(self.domain, self.minus)
        if np.array_equal(self.plus, self.minus):
            raise ValueError("vantage points must differ")

    def evaluate_many(self, points) -> np.ndarray:
        dom = self.domain
        raw = dom.raw_distances(self.plus, points) - dom.raw_distances(self.minus, points)
        # one rounding from exact integer counts on the Hamming cube
        return raw / (2.0 * dom._denom)

    def reference_points(self) -> list[np.ndarray]:
        return [self.plus, self.minus]


@dataclass(frozen=True, eq=False)
class Ball:
    """``f(w) = rho(center, w) - radius``; ``radius`` is the stored covering radius."""

    domain: Domain
    center: np.ndarray
    radius: float

    variant = "ball"

    def __post_init__(self):
        _as_point(self.domain, self.center)
        if not self.radius >= 0:
            raise ValueError("ball radius must be >= 0")

    def evaluate_many(self, points) -> np.ndarray:
        return _shifted_distances(self.domain, self.center, points, self.radius)

    def reference_points(self) -> list[np.ndarray]:
        return [self.center]


@dataclass(frozen=True, eq=False)
class Pivot:
    """``f(w) = rho(anchor, w) - threshold``; the anchor need not be a datapoint."""

    domain: Domain
    anchor: np.ndarray
    threshold: float

    variant = "pivot"

    def __post_init__(self):
        _as_point(self.domain, self.anchor)
        if not np.isfinite(self.threshold):
            raise ValueError("pivot threshold must be finite")

    def evaluate_many(self, points) -> np.ndarray:
        return _shifted_distances(self.domain, self.anchor, points, self.threshold)

    def reference_points(self) -> list[np.ndarray]:
        return [self.anchor]


DecisionFunction = VantagePair | Ball | Pivot


def evaluate(f, w) -> float:
    w = _as_point(f.domain, w)
    return float(f.evaluate_many(w[None, :])[0])


def _toward(domain: Domain, rng: np.random.Generator, xs: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Move each row of ``xs`` part of the way along a geodesic toward ``ref``."""
    if domain.is_bits:
        take = domain.sample(rng, len(xs))  # bits copied from ref
        return (xs & ~take) | (ref & take)
    t = rng.random((len(xs), 1))
    ys = xs + t * (ref - xs)
    if domain.kind == "sphere":
        norms = np.linalg.norm(ys, axis=1, keepdims=True)
        ys = np.where(norms > 1e-12, ys / np.maximum(norms, 1e-300), xs)
    return ys


def _nearby(domain: Domain, rng: np.random.Generator, xs: np.ndarray) -> np.ndarray:
    if domain.is_bits:
        ys = xs.copy()
        bit = rng.integers(domain.d, size=len(xs))
        ys[np.arange(len(xs)), bit // 64] ^= np.left_shift(np.uint64(1), (bit % 64).astype(np.uint64))
        return ys
    step = 1e-3 * rng.standard_normal(xs.shape)
    ys = xs + step
    if domain.kind == "unit-cube":
        ys = np.clip(ys, 0.0, 1.0)
    elif domain.kind == "sphere":
        ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    return ys


def lipschitz_pairs(domain: Domain, rng: np.random.Generator, trials: int, refs=()) -> tuple[np.ndarray, np.ndarray]:
    """Pairs for probing a Lipschitz constant.

    A third are independent pairs, a third are nearby pairs, and a third join a
    random point to a point between it and one of ``refs`` (distance functions
    attain their slope along such geodesics).
    """
    xs = domain.sample(rng, trials)
    ys = domain.sample(rng, trials)
    k = trials // 3
    if k:
        ys[k : 2 * k] = _nearby(domain, rng, xs[k : 2 * k])
        if refs:
            which = rng.integers(len(refs), size=trials - 2 * k)
            seg = slice(2 * k, trials)
            moved = np.empty_like(xs[seg])
            for j, ref in enumerate(refs):
                sel = which == j
                moved[sel] = _toward(domain, rng, xs[seg][sel], np.asarray(ref))
            ys[seg] = moved
    return xs, ys


def check_lipschitz(f, seed: int, trials: int) -> float:
    """Largest ``|f(x) - f(y)| - rho(x, y)`` over sampled pairs (<= 0 when 1-Lipschitz)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dom = f.domain
    rng = stream(seed, "lipschitz", dom.kind, dom.d)
    xs, ys = lipschitz_pairs(dom, rng, trials, refs=tuple(f.reference_points()))
    fx = f.evaluate_many(xs)
    fy = f.evaluate_many(ys)
    rho = dom.paired_distances(xs, ys)
    return float(np.max(np.abs(fx - fy) - rho))
