"""Concentration-of-measure estimates.

Neighbourhoods here are closed: ``A_eps = {x : rho(x, A) <= eps}``.  The
concentration function is ``alpha(eps) = 1 - min mu(A_eps)`` over sets with
``mu(A) >= 1/2`` (and ``1/2`` at ``eps = 0``).  Nothing here minimises over all
sets; we report an upper bound (Chernoff-Okamoto), an exact value for the
half-cube witness, and Monte Carlo lower bounds from witness sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from mcl.domains import Domain
from mcl.rng import stream

METHODS = ("chernoff_okamoto", "exact_halfcube", "empirical_lower")


class GridError(ValueError):
    pass


class EmptyWitness(RuntimeError):
    pass


@dataclass(frozen=True)
class ConcentrationEstimate:
    eps: tuple[float, ...]
    alpha: tuple[float, ...]
    stderr: tuple[float, ...]
    method: str
    domain: Domain
    samples: int = 0
    witness: tuple[str, ...] = ()


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class NNRadiusStats:
    p10: float
    median: float
    p90: float
    mean: float
    occupancy: float
    n: int
    d: int
    queries: int
    seed: int

    @property
    def spread(self) -> float:
        return self.p90 - self.p10


def _binomial_se(p: float, m: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / m)


def _grid_steps(eps: float, d: int) -> int | None:
    t = eps * d
    r = round(t)
    return r if abs(t - r) < 1e-9 else None


# -- closed forms ---------------------------------------------------------


def chernoff_okamoto_bound(eps: float, d: int) -> float:
    """Upper bound ``exp(-3 eps^2 d / 4)`` on the Hamming cube's concentration function.

    Defined for ``0 < eps <= 1``.  As ``eps -> 0`` the value tends to 1; the
    concentration function itself is 1/2 at ``eps = 0`` by convention, which
    this bound does not try to reproduce.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    if d < 1:
        raise ValueError("d must be >= 1")
    return math.exp(-3.0 * eps * eps * d / 4.0)


def halfcube_alpha_exact(d: int, eps: float) -> float:
    """``1 - mu(A_eps)`` for the half-cube ``A = {sum(x) <= floor(d/2)}``.

    Equals ``P(Bin(d, 1/2) >= floor(d/2) + t + 1)`` with ``t = eps * d``, summed
    exactly in rational arithmetic.  It is a certified lower bound on the
    concentration function of ``{0,1}^d``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    t = _grid_steps(eps, d)
    if t is None or t < 0:
        raise GridError(f"eps={eps!r} is not on the grid {{0, 1/{d}, 2/{d}, ..., 1}} for d={d}")
    lo = d // 2 + t + 1
    tail = sum(math.comb(d, k) for k in range(lo, d + 1))
    return float(Fraction(tail, 2**d))


def concentration_curve(d: int, eps_grid, method: str) -> ConcentrationEstimate:
    eps_grid = tuple(float(e) for e in eps_grid)
    if method == "chernoff_okamoto":
        vals = tuple(chernoff_okamoto_bound(e, d) for e in eps_grid)
    elif method == "exact_halfcube":
        vals = tuple(halfcube_alpha_exact(d, e) for e in eps_grid)
    else:
        raise ValueError(f"no closed form for method {method!r}")
    return ConcentrationEstimate(eps_grid, vals, (0.0,) * len(vals), method, Domain("hamming", d))


def subspace_alpha_bound(alpha_omega_at_half_eps: float, mu_c: float) -> float:
    """Concentration bound for a subset ``C``: ``alpha_C(eps) <= alpha(eps/2) / mu(C)``, capped at 1."""
    if not mu_c > 0:
        raise ValueError("mu(C) must be > 0")
    if not 0 <= alpha_omega_at_half_eps <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return min(1.0, alpha_omega_at_half_eps / mu_c)


def bin_access_prediction(m: float) -> dict:
    """Bins met by a typical doubled query ball, and the measure of exceptions, for bin measure ``1/m``."""
    if m < 4:
        raise ValueError("m must be >= 4")
    return {"min_bins_met": 0.5 * math.sqrt(m), "exceptional_measure": 0.5 / math.sqrt(m)}


def entropy_radius(n: int, d: int) -> float:
    """First-order NN radius on ``{0,1}^d``: the root of ``1 - H2(r) = log2(n) / d``."""
    target = math.log2(n) / d
    if target >= 1:
        return 0.0

    def gap(r):
        return 1 + r * math.log2(r) + (1 - r) * math.log2(1 - r) - target

    return brentq(gap, 1e-12, 0.5 - 1e-12) if target > 0 else 0.5


# -- witness battery --------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A 1-Lipschitz function given as ``raw(points) / scale``."""

    name: str
    raw: Callable[[np.ndarray], np.ndarray]
    scale: float
    integral: bool = False


def witness_battery(domain: Domain, rng: np.random.Generator) -> list[Witness]:
    if domain.is_bits:
        d = domain.d
        return [
            Witness("coordinate-sum", lambda p: np.bitwise_count(p).sum(axis=1, dtype=np.int64), d, True),
            Witness("first-coordinate", lambda p: (p[:, 0] & np.uint64(1)).astype(np.int64), d, True),
            Witness("distance-to-point", _dist_raw(domain, domain.sample(rng, 1)[0]), d, True),
        ]
    den = domain._denom
    return [
        Witness("coordinate-sum", lambda p: p.sum(axis=1), math.sqrt(domain.d) * den),
        Witness("first-coordinate", lambda p: p[:, 0].copy(), den),
        Witness("distance-to-point", _dist_raw(domain, domain.sample(rng, 1)[0]), den),
    ]


def _dist_raw(domain: Domain, p: np.ndarray):
    return lambda pts: domain.raw_distances(p, pts)


def _tail_above(w: Witness, vals: np.ndarray, med, eps: float) -> float:
    """Fraction of ``vals`` with ``raw/scale > med/scale + eps``."""
    if w.integral:
        t = _grid_steps(eps, int(w.scale))
        if t is not None:
            return float(np.mean(vals > med + t))
    return float(np.mean((vals - med) / w.scale > eps))


def empirical_alpha_lower(domain: Domain, seed: int, samples: int, eps_grid) -> ConcentrationEstimate:
    """Monte Carlo lower bound on the concentration function.

    Each witness ``g`` gives a set ``A = {g <= median(g)}`` of measure at least
    1/2; since ``rho(x, A) >= g(x) - median``, the fraction of samples with
    ``g > median + eps`` estimates a lower bound on ``alpha(eps)``.  The
    reported value is the maximum over the battery.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = stream(seed, "alpha-witness", domain.kind, domain.d)
    battery = witness_battery(domain, rng)
    pts = domain.sample(rng, samples)
    eps_grid = tuple(float(e) for e in eps_grid)
    best = np.zeros(len(eps_grid))
    who = [""] * len(eps_grid)
    for w in battery:
        vals = w.raw(pts)
        med = np.quantile(vals, 0.5, method="inverted_cdf")
        for i, e in enumerate(eps_grid):
            v = _tail_above(w, vals, med, e)
            if not who[i] or v > best[i]:
                best[i], who[i] = v, w.name
    se = tuple(_binomial_se(v, samples) for v in best)
    return ConcentrationEstimate(eps_grid, tuple(float(v) for v in best), se, "empirical_lower", domain, samples, tuple(who))


# -- neighbourhoods -----------------------------------------------------------


@dataclass(frozen=True)
class TargetSet:
    """A measurable set: membership test plus, optionally, exact distance to the set."""

    name: str
    contains: Callable[[np.ndarray], np.ndarray]
    distance: Callable[[np.ndarray], np.ndarray] | None = None


def whole_space(domain: Domain) -> TargetSet:
    return TargetSet("whole-space", lambda p: np.ones(len(p), dtype=bool), lambda p: np.zeros(len(p)))


def hamming_weight_set(domain: Domain, at_most: int | None = None, at_least: int | None = None) -> TargetSet:
    """``{x : sum(x) <= at_most}`` or ``{x : sum(x) >= at_least}`` with exact distance."""
    if not domain.is_bits or (at_most is None) == (at_least is None):
        raise ValueError("give exactly one of at_most / at_least on a hamming domain")

    def weight(p):
        return np.bitwise_count(p).sum(axis=1, dtype=np.int64)

    if at_most is not None:
        return TargetSet(
            f"weight<={at_most}",
            lambda p: weight(p) <= at_most,
            lambda p: np.maximum(weight(p) - at_most, 0) / domain.d,
        )
    return TargetSet(
        f"weight>={at_least}",
        lambda p: weight(p) >= at_least,
        lambda p: np.maximum(at_least - weight(p), 0) / domain.d,
    )


def halfcube_set(domain: Domain) -> TargetSet:
    return hamming_weight_set(domain, at_most=domain.d // 2)


def neighborhood_measure(
    domain: Domain, target: TargetSet, eps: float, samples: int, seed: int
) -> MCEstimate:
    """Monte Carlo estimate of ``mu(A_eps)``.

    Without an exact distance, distance to ``A`` is taken against a witness
    sample of ``A`` drawn from the domain measure, which can only overestimate
    it; the estimate is then biased low.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = stream(seed, "neighbourhood", domain.kind, domain.d, target.name)
    ys = domain.sample(rng, samples)
    tol = eps + 1e-12 * max(1.0, abs(eps))
    if target.distance is not None:
        inside = target.distance(ys) <= tol
    else:
        pool = domain.sample(rng, samples)
        wit = pool[target.contains(pool)]
        if len(wit) == 0:
            raise EmptyWitness(f"no point of {target.name!r} found in {samples} draws")
        inside = target.contains(ys).copy()
        for i in np.flatnonzero(~inside):
            inside[i] = domain.distances(ys[i], wit).min() <= tol
    p = float(inside.mean())
    return MCEstimate(p, _binomial_se(p, samples), samples)


def set_measure(domain: Domain, target: TargetSet, samples: int, seed: int) -> MCEstimate:
    rng = stream(seed, "set-measure", domain.kind, domain.d, target.name)
    p = float(target.contains(domain.sample(rng, samples)).mean())
    return MCEstimate(p, _binomial_se(p, samples), samples)


def gromov_milman_check(
    domain: Domain, target: TargetSet, gamma: float, alpha_at_gamma: float, samples: int, seed: int
) -> dict:
    """Sampled form of: ``mu(A) > alpha(gamma)`` implies ``mu(A_gamma) > 1/2``.

    Returns the two measured quantities, whether the hypothesis held, and
    whether the conclusion held within three standard errors.
    """
    m_a = set_measure(domain, target, samples, seed)
    m_ag = neighborhood_measure(domain, target, gamma, samples, seed)
    hyp = m_a.value > alpha_at_gamma
    return {
        "measure": m_a.value,
        "neighbourhood_measure": m_ag.value,
        "stderr": m_ag.stderr,
        "hypothesis": hyp,
        "conclusion": m_ag.value > 0.5 - 3 * m_ag.stderr,
    }


# -- nearest-neighbour radius ---------------------------------------------


def nn_radius_stats(domain: Domain, n: int, queries: int, seed: int) -> NNRadiusStats:
    """Distribution of the distance from a random query to its nearest datapoint.

    Data and queries are both drawn from the domain measure.  ``occupancy`` is
    the mean number of datapoints at distance ``<= eps_NN``, i.e. the
    nearest neighbour plus any ties.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if queries < 1:
        raise ValueError("queries must be >= 1")
    data = domain.sample(stream(seed, "nn-radius", "data", domain.kind, domain.d), n)
    qs = domain.sample(stream(seed, "nn-radius", "queries", domain.kind, domain.d), queries)
    radii = np.empty(queries)
    occ = np.empty(queries, dtype=np.int64)
    for i, w in enumerate(qs):
        dist = domain.distances(w, data)
        radii[i] = r = dist.min()
        occ[i] = int(np.count_nonzero(dist <= r))
    p10, med, p90 = np.quantile(radii, [0.1, 0.5, 0.9], method="inverted_cdf")
    return NNRadiusStats(
        float(p10), float(med), float(p90), float(radii.mean()), float(occ.mean()), n, domain.d, queries, seed
    )
