"""Binary metric trees: construction, validation and traced search.

Every internal node carries a 1-Lipschitz decision function ``f``; stored
points with ``f <= 0`` live under the minus child and points with ``f > 0``
under the plus child.  A range query ``(w, eps)`` descends into the minus child
iff ``f(w) < eps`` and into the plus child iff ``f(w) > -eps``, so a subtree is
skipped only when ``f`` certifies that none of its points is within ``eps``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from mcl.decision import Ball, Pivot, VantagePair
from mcl.domains import DimensionMismatch, Domain
from mcl.rng import stream

STRATEGIES = ("vp", "ball", "pivot")


@dataclass(frozen=True)
class BuildParams:
    strategy: str = "vp"
    b: int = 16  # bin capacity
    c: int = 16  # candidate sample size for vantage selection
    h: int = 48  # depth cap

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.b < 1:
            raise ValueError("bin capacity b must be >= 1")
        if self.c < 1:
            raise ValueError("candidate sample size c must be >= 1")
        if self.h < 1:
            raise ValueError("depth cap h must be >= 1")


@dataclass(frozen=True, eq=False)
class Internal:
    f: VantagePair | Ball | Pivot
    minus: int
    plus: int
    depth: int


@dataclass(frozen=True, eq=False)
class Leaf:
    bin: np.ndarray
    depth: int


@dataclass(eq=False)
class MetricTree:
    domain: Domain
    nodes: list
    root: int
    params: BuildParams
    n: int
    seed: int
    points: np.ndarray = field(repr=False)

    @property
    def leaves(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if isinstance(nd, Leaf)]

    @property
    def leaf_count(self) -> int:
        return sum(isinstance(nd, Leaf) for nd in self.nodes)

    @property
    def internal_count(self) -> int:
        return len(self.nodes) - self.leaf_count

    @property
    def depth(self) -> int:
        return max(nd.depth for nd in self.nodes)

    def subtree_points(self, node: int) -> np.ndarray:
        """Sorted indices of all datapoints stored below ``node``."""
        out, stack = [], [node]
        while stack:
            nd = self.nodes[stack.pop()]
            if isinstance(nd, Leaf):
                out.append(nd.bin)
            else:
                stack += (nd.minus, nd.plus)
        return np.unique(np.concatenate(out)) if out else np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class RangeQuery:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"query radius must be > 0, got {self.radius!r}")


@dataclass(frozen=True)
class SearchTrace:
    internal_nodes_visited: int = 0
    decision_evaluations: int = 0
    bins_opened: int = 0
    distance_computations: int = 0
    result_size: int = 0
    pruned: tuple[int, ...] = ()
    rounds: tuple["SearchTrace", ...] = ()

    @property
    def cost(self) -> int:
        return self.decision_evaluations + self.distance_computations

    def __add__(self, other: "SearchTrace") -> "SearchTrace":
        return SearchTrace(
            self.internal_nodes_visited + other.internal_nodes_visited,
            self.decision_evaluations + other.decision_evaluations,
            self.bins_opened + other.bins_opened,
            self.distance_computations + other.distance_computations,
            self.result_size + other.result_size,
            self.pruned + other.pruned,
        )


class NNResult(NamedTuple):
    index: int
    distance: float
    trace: SearchTrace


# -- construction -------------------------------------------------------


def _all_identical(points: np.ndarray) -> bool:
    return bool(np.all(points == points[0]))


def _vp_function(dom, points, idx, rng, c):
    k = min(c, len(idx))
    cand = np.sort(rng.choice(idx, size=k, replace=False))
    if k >= 2:
        dm = dom.cdist(points[cand], points[cand])
        i, j = np.unravel_index(int(np.argmax(dm)), dm.shape)
        if dm[i, j] > 0:
            i, j = sorted((i, j))
            return VantagePair(dom, points[cand[i]], points[cand[j]])
    # candidates coincide: pair the first with the farthest point of the node
    far = dom.distances(points[cand[0]], points[idx])
    if far.max() == 0:
        return None
    return VantagePair(dom, points[cand[0]], points[idx[int(np.argmax(far))]])


def _ball_function(dom, points, idx, rng):
    center = points[int(rng.choice(idx))]
    dist = dom.distances(center, points[idx])
    if dist.max() == 0:
        return None
    radius = np.sort(dist)[(len(dist) - 1) // 2]
    if not (dist > radius).any():
        radius = dist[dist < dist.max()].max()
    return Ball(dom, center, float(radius))


def _pivot_function(dom, points, idx, rng):
    anchor = dom.sample(rng, 1)[0]
    dist = dom.distances(anchor, points[idx])
    values = np.unique(dist)
    if len(values) == 1:
        if _all_identical(points[idx]):
            return None
        anchor = points[int(rng.choice(idx))]
        dist = dom.distances(anchor, points[idx])
        values = np.unique(dist)
        if len(values) == 1:
            return None
    med = np.sort(dist)[(len(dist) - 1) // 2]
    p = min(int(np.searchsorted(values, med)), len(values) - 2)
    lo, hi = float(values[p]), float(values[p + 1])
    threshold = lo + (hi - lo) / 2
    if not threshold < hi:
        threshold = lo
    return Pivot(dom, anchor, threshold)


def build(points, domain: Domain, params: BuildParams = BuildParams(), seed: int = 0) -> MetricTree:
    """Build a metric tree over ``points``.

    ``vp`` pairs the farthest two of ``c`` sampled node points; ``ball`` uses a
    random node point as centre with the median distance to it as covering
    radius; ``pivot`` draws a fresh anchor from the domain measure and splits at
    the gap around the median distance.  Points with ``f == 0`` go to the minus
    child.  Nodes that hold at most ``b`` points, reach depth ``h`` or contain a
    single repeated point become leaves.
    """
    points = domain.check(points)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("cannot build a tree over an empty dataset")
    rng = stream(seed, "build", params.strategy, domain.kind, domain.d)
    nodes: list = []

    def split(idx: np.ndarray, depth: int) -> int:
        slot = len(nodes)
        nodes.append(None)
        f = None
        if len(idx) > params.b and depth < params.h:
            if params.strategy == "vp":
                f = _vp_function(domain, points, idx, rng, params.c)
            elif params.strategy == "ball":
                f = _ball_function(domain, points, idx, rng)
            else:
                f = _pivot_function(domain, points, idx, rng)
        if f is None:
            nodes[slot] = Leaf(idx, depth)
            return slot
        vals = f.evaluate_many(points[idx])
        minus = split(idx[vals <= 0], depth + 1)
        plus = split(idx[vals > 0], depth + 1)
        nodes[slot] = Internal(f, minus, plus, depth)
        return slot

    root = split(np.arange(len(points), dtype=np.int64), 0)
    return MetricTree(domain, nodes, root, params, len(points), seed, points)


# -- validation ---------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    node: int | None
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: list[Violation]


def validate_tree(tree: MetricTree, points=None) -> ValidationReport:
    """Exhaustively check arity, coverage, bin capacity and the sign condition."""
    points = tree.points if points is None else points
    n = len(points)
    nodes = tree.nodes
    out: list[Violation] = []

    parents: dict[int, int] = defaultdict(int)
    for i, nd in enumerate(nodes):
        if isinstance(nd, Internal):
            for child in (nd.minus, nd.plus):
                if not 0 <= child < len(nodes):
                    out.append(Violation(i, "arity", f"child index {child} out of range"))
                else:
                    parents[child] += 1
            if nd.minus == nd.plus:
                out.append(Violation(i, "arity", "both children are the same node"))
        elif not isinstance(nd, Leaf):
            out.append(Violation(i, "arity", f"node is neither internal nor leaf: {nd!r}"))
    if parents.get(tree.root):
        out.append(Violation(tree.root, "arity", "root has a parent"))
    for i in range(len(nodes)):
        if i != tree.root and parents.get(i, 0) != 1:
            out.append(Violation(i, "arity", f"node has {parents.get(i, 0)} parents"))
    if out:
        return ValidationReport(False, out)

    # points stored below each node, bottom-up
    below: dict[int, np.ndarray] = {}
    order, stack = [], [tree.root]
    while stack:
        i = stack.pop()
        order.append(i)
        if isinstance(nodes[i], Internal):
            stack += (nodes[i].minus, nodes[i].plus)
    for i in reversed(order):
        nd = nodes[i]
        if isinstance(nd, Leaf):
            bad = nd.bin[(nd.bin < 0) | (nd.bin >= n)]
            if len(bad):
                out.append(Violation(i, "coverage", f"bin holds out-of-range indices {bad.tolist()}"))
            b = nd.bin[(nd.bin >= 0) & (nd.bin < n)]
            below[i] = b
            if len(b) > tree.params.b and nd.depth < tree.params.h and not _all_identical(points[b]):
                out.append(Violation(i, "capacity", f"bin of size {len(b)} exceeds b={tree.params.b}"))
        else:
            below[i] = np.concatenate([below[nd.minus], below[nd.plus]])
            problems = []
            for side, child, sign in (("minus", nd.minus, 1.0), ("plus", nd.plus, -1.0)):
                idx = below[child]
                if len(idx) == 0:
                    continue
                vals = nd.f.evaluate_many(points[idx])
                wrong = idx[sign * vals > 0]
                if len(wrong):
                    rel = "<= 0" if side == "minus" else ">= 0"
                    problems.append(f"{len(wrong)} point(s) under the {side} child violate f {rel}, e.g. {int(wrong[0])}")
            if problems:
                out.append(Violation(i, "sign", "; ".join(problems)))

    covered = np.zeros(n, dtype=bool)
    covered[below[tree.root]] = True
    if not covered.all():
        missing = np.flatnonzero(~covered)
        out.append(Violation(None, "coverage", f"{len(missing)} datapoint(s) in no bin, e.g. {missing[:5].tolist()}"))
    return ValidationReport(not out, out)


# -- search -------------------------------------------------------------


def _search(tree: MetricTree, w: np.ndarray, eps: float, record: bool = False):
    nodes, dom, pts = tree.nodes, tree.domain, tree.points
    w1 = w[None, :]
    frontier = [tree.root]
    hits, hit_dist = [], []
    visited = evals = opened = dists = 0
    pruned = []
    while frontier:
        nxt = []
        for t in frontier:
            nd = nodes[t]
            if isinstance(nd, Internal):
                visited += 1
                evals += 1
                v = nd.f.evaluate_many(w1)[0]
                if v < eps:
                    nxt.append(nd.minus)
                elif record:
                    pruned.append(nd.minus)
                if v > -eps:
                    nxt.append(nd.plus)
                elif record:
                    pruned.append(nd.plus)
            else:
                opened += 1
                if len(nd.bin):
                    dist = dom.distances(w, pts[nd.bin])
                    dists += len(nd.bin)
                    inside = dist < eps
                    hits.append(nd.bin[inside])
                    hit_dist.append(dist[inside])
        frontier = nxt
    if hits:
        idx = np.concatenate(hits)
        dd = np.concatenate(hit_dist)
        idx, first = np.unique(idx, return_index=True)
        dd = dd[first]
    else:
        idx, dd = np.empty(0, dtype=np.int64), np.empty(0)
    trace = SearchTrace(visited, evals, opened, dists, len(idx), tuple(pruned))
    return idx, dd, trace


def _check_center(tree: MetricTree, w) -> np.ndarray:
    w = np.asarray(w)
    if w.shape != (tree.domain.width,):
        raise DimensionMismatch(f"query center must have shape ({tree.domain.width},), got {w.shape}")
    return w


def range_search(tree: MetricTree, q: RangeQuery, record_pruned: bool = False) -> tuple[np.ndarray, SearchTrace]:
    """Answer ``{i : rho(q.center, x_i) < q.radius}``; matches come back sorted."""
    w = _check_center(tree, q.center)
    idx, _, trace = _search(tree, w, float(q.radius), record_pruned)
    return idx, trace


def nn_search(tree: MetricTree, w, r0: float = 0.05, growth: float = 2.0, max_rounds: int = 4096) -> NNResult:
    """Exact nearest neighbour via range queries of growing radius.

    Radii ``r0, r0*growth, ...`` are tried until a query returns something;
    a last query at the next float above the best distance found confirms the
    answer.  Ties go to the smallest index.  The returned trace sums all
    rounds and keeps the per-round traces in ``trace.rounds``.
    """
    if not r0 > 0 or not growth > 1:
        raise ValueError("need r0 > 0 and growth > 1")
    w = _check_center(tree, w)
    rounds = []
    r = float(r0)
    for _ in range(max_rounds):
        idx, dd, tr = _search(tree, w, r)
        rounds.append(tr)
        if len(idx):
            break
        r *= growth
    else:
        raise RuntimeError("nearest-neighbour schedule did not terminate")
    best = float(dd.min())
    confirm = math.nextafter(best, math.inf)
    idx, dd, tr = _search(tree, w, confirm)
    rounds.append(tr)
    if not len(idx) or float(dd.min()) != best:
        raise RuntimeError("confirmation query disagrees with the search rounds")
    total = SearchTrace()
    for tr in rounds:
        total = total + tr
    total = replace(total, rounds=tuple(rounds))
    return NNResult(int(idx[dd == best].min()), best, total)


def linear_scan(domain: Domain, points, q: RangeQuery) -> np.ndarray:
    """Exact answer by scanning every point."""
    points = np.asarray(points)
    if len(points) == 0:
        return np.empty(0, dtype=np.int64)
    dist = domain.distances(np.asarray(q.center), points)
    return np.flatnonzero(dist < q.radius)


def linear_nn(domain: Domain, points, w) -> tuple[int, float]:
    dist = domain.distances(np.asarray(w), np.asarray(points))
    i = int(np.argmin(dist))
    return i, float(dist[i])
