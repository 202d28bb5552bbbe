"""Shattering, VC-dimension search and the associated sample-size bounds.

A concept class is a membership rule ``member(params, points) -> bool[B, k]``
over a batch of ``B`` parameter rows.  Classes are either *enumerable*
(``params`` is the whole class, so every answer is exact) or *sampled*
(``sampler`` draws parameters at random).  A sampled class may also carry a
``realizer``: an exact test of whether some concept cuts out a given subset.
Without one, a negative shattering answer only means "not found within
budget".
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from mcl.rng import stream

MAX_POINTS = 20


@dataclass(frozen=True)
class ConceptClass:
    name: str
    member: Callable[[np.ndarray, np.ndarray], np.ndarray]
    params: np.ndarray | None = None
    sampler: Callable[[np.random.Generator, np.ndarray, int], np.ndarray] | None = None
    realizer: Callable[[np.ndarray, np.ndarray], np.ndarray | None] | None = None
    # exact shortcut: a subset mask no concept can cut out, or None if undecided
    obstruction: Callable[[np.ndarray], int | None] | None = None
    budget: int = 512

    def __post_init__(self):
        if self.params is None and self.sampler is None:
            raise ValueError("a concept class needs either params or a sampler")

    @property
    def enumerable(self) -> bool:
        return self.params is not None

    @property
    def exact(self) -> bool:
        return self.enumerable or self.realizer is not None

    def __len__(self) -> int:
        if not self.enumerable:
            raise TypeError(f"{self.name} is not enumerable")
        return len(self.params)


@dataclass
class ShatterReport:
    points: np.ndarray
    shattered: bool
    missing: int | None = None  # bitmask over the points, bit i = point i
    concepts: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    exact: bool = True

    @property
    def missing_subset(self) -> tuple[int, ...] | None:
        if self.missing is None:
            return None
        return tuple(i for i in range(len(self.points)) if self.missing >> i & 1)

    @property
    def verdict(self) -> str:
        if self.shattered:
            return "shattered"
        return "not shattered" if self.exact else "not refuted"


def _masks(inside: np.ndarray) -> np.ndarray:
    weights = (1 << np.arange(inside.shape[1], dtype=np.int64)) if inside.shape[1] else np.zeros(0, np.int64)
    return inside.astype(np.int64) @ weights


def shatters(points, cls: ConceptClass, budget: int | None = None, seed: int = 0) -> ShatterReport:
    """Decide whether ``cls`` cuts out every subset of ``points``.

    The empty point set counts as shattered.  For sampled classes without a
    realizer a negative answer carries ``exact=False``.
    """
    points = np.asarray(points)
    k = len(points)
    if k > MAX_POINTS:
        raise ValueError(f"refusing to enumerate 2^{k} subsets (limit {MAX_POINTS} points)")
    if k == 0:
        return ShatterReport(points, True, exact=True)
    full = 1 << k
    if cls.obstruction is not None:
        blocked = cls.obstruction(points)
        if blocked is not None:
            return ShatterReport(points, False, blocked, {}, exact=True)
    found: dict[int, np.ndarray] = {}

    def absorb(params):
        if len(params) == 0:
            return
        for m, p in zip(_masks(cls.member(params, points)).tolist(), params):
            found.setdefault(m, p)

    if cls.enumerable:
        absorb(np.asarray(cls.params))
    else:
        rng = stream(seed, "shatter", cls.name, k)
        absorb(cls.sampler(rng, points, budget or cls.budget))
    if len(found) < full and cls.realizer is not None and not cls.enumerable:
        for m in range(full):
            if m in found:
                continue
            subset = np.array([(m >> i) & 1 for i in range(k)], dtype=bool)
            p = cls.realizer(points, subset)
            if p is None:
                return ShatterReport(points, False, m, found, exact=True)
            found[m] = p
    missing = next((m for m in range(full) if m not in found), None)
    return ShatterReport(points, missing is None, missing, found, exact=cls.exact or missing is None)


def find_shattered_subset(sample, cls: ConceptClass, k: int, budget: int, seed: int = 0):
    """Randomly try ``budget`` k-subsets of ``sample``; return ``(indices, report)`` or ``None``."""
    sample = np.asarray(sample)
    if k > MAX_POINTS:
        raise ValueError(f"k must be <= {MAX_POINTS}")
    if k > len(sample):
        return None
    rng = stream(seed, "find-shattered", cls.name, k)
    for trial in range(budget):
        idx = np.sort(rng.choice(len(sample), size=k, replace=False))
        rep = shatters(sample[idx], cls, seed=seed * 1_000_003 + trial)
        if rep.shattered:
            return idx, rep
    return None


def vc_dimension_exhaustive(domain_points, cls: ConceptClass, limit: int | None = None) -> tuple[int, tuple[int, ...]]:
    """Exact VC dimension of an enumerable class over a finite domain.

    Shattered sets are closed under taking subsets, so candidates of size
    ``j + 1`` are grown only from shattered sets of size ``j``.  Returns the
    dimension and one largest shattered set (as domain indices).
    """
    if not cls.enumerable:
        raise TypeError("exhaustive VC dimension needs an enumerable class")
    domain_points = np.asarray(domain_points)
    inside = cls.member(np.asarray(cls.params), domain_points)
    # one python int per concept: bit j set iff domain point j is in it
    rows = {int(m) for m in _bitrows(inside)}
    size = len(domain_points)
    level = [()] if rows else []
    best: tuple[int, ...] = ()
    j = 0
    while level and (limit is None or j < limit):
        nxt = set()
        for s in level:
            start = s[-1] + 1 if s else 0
            for e in range(start, size):
                cand = s + (e,)
                if _shattered_bits(rows, cand):
                    nxt.add(cand)
        if not nxt:
            break
        level = sorted(nxt)
        best = level[0]
        j += 1
    return len(best), best


def _bitrows(inside: np.ndarray) -> list[int]:
    return [int("".join("1" if v else "0" for v in row[::-1]) or "0", 2) for row in inside]


def _shattered_bits(rows: set[int], cand: tuple[int, ...]) -> bool:
    mask = 0
    for e in cand:
        mask |= 1 << e
    return len({r & mask for r in rows}) == 1 << len(cand)


# -- bounds ---------------------------------------------------------------


def goldberg_jerrum_bound(s: int, t: int) -> int:
    """VC bound ``4 s (t + 2)`` for classes computed by ``t`` arithmetic/branch steps on ``s`` real parameters."""
    if s < 1 or t < 1:
        raise ValueError("s and t must be >= 1")
    return 4 * s * (t + 2)


def bins_class_bound(h: int, p: int, base: float = 2.0) -> float:
    """VC bound ``4 h p log(2 h p)`` on bins of depth-``h`` trees whose split sets have VC dimension ``p``."""
    if h < 1 or p < 1:
        raise ValueError("h and p must be >= 1")
    return 4 * h * p * math.log(2 * h * p, base)


def sample_size_bound(eps: float, delta: float, d: int, base: float = math.e) -> int:
    """Sample size after which empirical measures are uniformly ``eps``-accurate with confidence ``1 - delta``."""
    if not (0 < eps < 1 and 0 < delta < 1) or d < 1:
        raise ValueError("need 0 < eps < 1, 0 < delta < 1, d >= 1")

    def log(x):
        return math.log(x, base)

    inner = (2 * math.e**2 / eps) * log(2 * math.e / eps)
    return math.ceil(128 / eps**2 * (d * log(inner) + log(8 / delta)))


def hamming_ball_vc_upper(d: int) -> int:
    """``d + floor(log2 d)``: the finite-class bound for Hamming balls."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return d + int(math.floor(math.log2(d)))


class OracleUnavailable(LookupError):
    pass


def empirical_deviation(cls: ConceptClass, dataset, measure: Callable[[np.ndarray], float | None]) -> float:
    """``sup_A |mu(A) - |X ∩ A| / n|`` over an enumerable class."""
    if not cls.enumerable:
        raise TypeError("empirical_deviation needs an enumerable class")
    dataset = np.asarray(dataset)
    params = np.asarray(cls.params)
    freq = cls.member(params, dataset).mean(axis=1)
    worst = 0.0
    for p, f in zip(params, freq):
        mu = measure(p)
        if mu is None:
            raise OracleUnavailable(f"no measure available for concept {p!r} of {cls.name}")
        worst = max(worst, abs(mu - float(f)))
    return worst


# -- concept classes --------------------------------------------------------


def _lp_separate(a_in: np.ndarray, b_in: np.ndarray, a_out: np.ndarray, b_out: np.ndarray):
    """Maximise margin ``t <= 1`` with ``a_in z + b_in + t <= 0`` and ``a_out z + b_out - t >= 0``."""
    nvar = (a_in.shape[1] if len(a_in) else a_out.shape[1]) + 1
    A = np.vstack([np.hstack([a_in, np.ones((len(a_in), 1))]), np.hstack([-a_out, np.ones((len(a_out), 1))])])
    b = np.concatenate([-b_in, b_out])
    c = np.zeros(nvar)
    c[-1] = -1.0
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * (nvar - 1) + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    return res.x[:-1]


def _ball_member(params, points):
    d = points.shape[1]
    c, r = params[:, :d], params[:, d]
    diff = points[None, :, :] - c[:, None, :]
    return np.sqrt((diff * diff).sum(axis=2)) < r[:, None]


def _ball_sampler(rng, points, budget):
    k, d = points.shape
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    centers = lo + (hi - lo + span) * rng.random((budget, d)) - span / 2
    pick = rng.random((budget, k)) < 0.5
    # radius tuned to a random subset so small and large concepts both appear
    dist = np.sqrt(((points[None] - centers[:, None]) ** 2).sum(axis=2))
    far_in = np.where(pick, dist, -np.inf).max(axis=1)
    near_out = np.where(~pick, dist, np.inf).min(axis=1)
    r = np.where(np.isfinite(far_in), far_in, 0.0)
    gap = np.where(np.isfinite(near_out), near_out, r + span)
    radius = np.where(gap > r, (r + gap) / 2, r + 1e-9 * span)
    return np.hstack([centers, radius[:, None]])


def _ball_realizer(points, subset):
    k, d = points.shape
    if not subset.any():
        far = points.max(axis=0) + 10 * (np.ptp(points, axis=0).max() + 1)
        return np.concatenate([far, [1e-9]])
    # |x - c|^2 < r^2  <=>  -2 c.x + s + |x|^2 < 0 with s = |c|^2 - r^2
    sq = (points * points).sum(axis=1)
    A = np.hstack([-2 * points, np.ones((k, 1))])
    z = _lp_separate(A[subset], sq[subset], A[~subset], sq[~subset])
    if z is None:
        return None
    c, s = z[:d], z[d]
    r2 = float(c @ c - s)
    if r2 <= 0:
        return None
    p = np.concatenate([c, [math.sqrt(r2)]])
    return p if np.array_equal(_ball_member(p[None], points)[0], subset) else None


def _ball_obstruction(points):
    """The one subset of ``d + 2`` points in general position that no ball cuts out.

    Such points carry a unique affine dependence ``sum a_i x_i = 0``,
    ``sum a_i = 0``.  Lifting onto the paraboloid ``|x|^2``, the side of the
    dependence with the larger weighted height cannot be separated from the
    other side by a ball; every other subset can.
    """
    k, d = points.shape
    if k != d + 2:
        return None
    m = np.vstack([points.T, np.ones(k)])
    _, sv, vt = np.linalg.svd(m)
    if sv[-1] < 1e-9 * sv[0]:
        return None
    a = vt[-1]
    if np.min(np.abs(a)) < 1e-9 * np.max(np.abs(a)):
        return None
    lift = a @ (points * points).sum(axis=1)
    scale = np.abs(a) @ (points * points).sum(axis=1)
    if abs(lift) <= 1e-9 * max(scale, 1e-300):
        return None  # cocircular: leave it to the LP
    side = a > 0 if lift > 0 else a < 0
    return sum(1 << int(i) for i in np.flatnonzero(side))


def euclidean_balls(d: int) -> ConceptClass:
    """Open balls in ``R^d``; params are ``(center, radius)``; exact via an LP on the lifted points."""
    return ConceptClass(
        f"balls-R{d}", _ball_member, sampler=_ball_sampler, realizer=_ball_realizer, obstruction=_ball_obstruction
    )


def _box_member(params, points):
    d = points.shape[1]
    lo, hi = params[:, :d], params[:, d:]
    return np.all((points[None] >= lo[:, None]) & (points[None] <= hi[:, None]), axis=2)


def _box_sampler(rng, points, budget):
    k, d = points.shape
    a = points[rng.integers(k, size=(budget, d)), np.arange(d)]
    b = points[rng.integers(k, size=(budget, d)), np.arange(d)]
    return np.hstack([np.minimum(a, b), np.maximum(a, b)])


def _box_realizer(points, subset):
    if not subset.any():
        far = points.max(axis=0) + 1.0 + np.ptp(points, axis=0)
        return np.concatenate([far, far])
    p = np.concatenate([points[subset].min(axis=0), points[subset].max(axis=0)])
    return p if np.array_equal(_box_member(p[None], points)[0], subset) else None


def axis_boxes(d: int) -> ConceptClass:
    """Closed axis-parallel boxes in ``R^d``; exact via the bounding box of the subset."""
    return ConceptClass(f"boxes-R{d}", _box_member, sampler=_box_sampler, realizer=_box_realizer)


def _halfspace_member(params, points):
    d = points.shape[1]
    return params[:, :d] @ points.T >= params[:, d][:, None]


def _halfspace_realizer(points, subset):
    k, d = points.shape
    if subset.all() or not subset.any():
        w = np.zeros(d)
        return np.concatenate([w, [-1.0 if subset.all() else 1.0]])
    # w.x - a >= 0 inside, < 0 outside
    A = np.hstack([-points, np.ones((k, 1))])
    z = _lp_separate(A[subset], np.zeros(subset.sum()), A[~subset], np.zeros((~subset).sum()))
    if z is None:
        return None
    p = z.copy()
    return p if np.array_equal(_halfspace_member(p[None], points)[0], subset) else None


def _halfspace_sampler(rng, points, budget):
    k, d = points.shape
    w = rng.standard_normal((budget, d))
    proj = points @ w.T
    a = proj[rng.integers(k, size=budget), np.arange(budget)] + 1e-9
    return np.hstack([w, a[:, None]])


def halfspaces(d: int) -> ConceptClass:
    """Closed half-spaces ``{x : w.x >= a}`` in ``R^d``."""
    return ConceptClass(f"halfspaces-R{d}", _halfspace_member, sampler=_halfspace_sampler, realizer=_halfspace_realizer)


def hamming_cube(d: int) -> np.ndarray:
    """All points of ``{0,1}^d`` as 0/1 rows, in binary counting order."""
    return np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)


def hamming_balls(d: int) -> ConceptClass:
    """All closed balls of ``{0,1}^d`` (raw Hamming distance), ``2^d (d+1)`` concepts."""
    centers = hamming_cube(d)
    params = np.array([np.append(c, r) for c in centers for r in range(d + 1)], dtype=np.int64)

    def member(ps, pts):
        c, r = ps[:, :d], ps[:, d]
        return (pts[None, :, :] != c[:, None, :]).sum(axis=2) <= r[:, None]

    return ConceptClass(f"hamming-balls-{d}", member, params=params)


def weight_thresholds(d: int) -> ConceptClass:
    """``{x in {0,1}^d : sum(x) >= a}`` for ``a = 0..d``."""

    def member(ps, pts):
        return pts.sum(axis=1)[None, :] >= ps[:, 0][:, None]

    return ConceptClass(f"weight-thresholds-{d}", member, params=np.arange(d + 1)[:, None])


def weight_threshold_measure(d: int):
    """Exact measure of a weight threshold set under the uniform measure."""

    def measure(p) -> float:
        a = int(p[0])
        return sum(math.comb(d, j) for j in range(max(a, 0), d + 1)) / 2**d

    return measure


def first_coordinate_thresholds(d: int) -> ConceptClass:
    """``{x : x_1 >= a}`` for ``a in {0, 1}`` on ``{0,1}^d``."""

    def member(ps, pts):
        return pts[:, 0][None, :] >= ps[:, 0][:, None]

    return ConceptClass(f"first-coordinate-{d}", member, params=np.array([[0], [1]]))


def grid_intervals(m: int) -> ConceptClass:
    """Closed integer intervals ``[a, b]`` within ``{0..m-1}``."""
    params = np.array([(a, b) for a in range(m) for b in range(a, m)], dtype=np.int64)

    def member(ps, pts):
        x = pts[:, 0]
        return (x[None, :] >= ps[:, 0][:, None]) & (x[None, :] <= ps[:, 1][:, None])

    return ConceptClass(f"grid-intervals-{m}", member, params=params)


def table_class(table: np.ndarray, name: str = "table") -> ConceptClass:
    """A finite class given as a boolean table ``concepts x domain``; points are domain indices."""
    table = np.asarray(table, dtype=bool)

    def member(ps, pts):
        return table[ps[:, 0]][:, pts[:, 0]]

    return ConceptClass(name, member, params=np.arange(len(table))[:, None])


def random_table_class(size: int, domain_size: int, seed: int) -> ConceptClass:
    rng = stream(seed, "table-class", size, domain_size)
    table = rng.random((size, domain_size)) < 0.5
    return table_class(table, f"random-table-{size}x{domain_size}")


def finite_class_bound(cls: ConceptClass) -> int:
    """``ceil(log2 |class|)``, the finite-class VC bound."""
    return math.ceil(math.log2(len(cls))) if len(cls) > 1 else 0


def sample_concepts(cls: ConceptClass, points, budget: int, seed: int) -> np.ndarray:
    rng = stream(seed, "concepts", cls.name)
    return cls.sampler(rng, np.asarray(points), budget)


def as_points(values: Sequence[float]) -> np.ndarray:
    """Column of 1-d points, e.g. ``as_points([0, 1, 2])``."""
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)
