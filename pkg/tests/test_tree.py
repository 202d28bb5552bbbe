import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcl.decision import VantagePair
from mcl.domains import Domain, sample_points
from mcl.rng import stream
from mcl.tree import (
    STRATEGIES, BuildParams, Internal, Leaf, RangeQuery, build, linear_nn, linear_scan, nn_search, range_search,
    validate_tree,
)


@pytest.fixture(scope="module")
def ham12():
    dom = Domain("hamming", 12)
    pts = sample_points(dom, 0, 512)
    return dom, pts, {s: build(pts, dom, BuildParams(s, b=8), seed=1) for s in STRATEGIES}


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_single_point(strategy):
    dom = Domain("unit-cube", 3)
    t = build(sample_points(dom, 0, 1), dom, BuildParams(strategy), seed=0)
    assert len(t.nodes) == 1 and t.depth == 0 and isinstance(t.nodes[0], Leaf)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_identical_points_make_one_leaf(strategy):
    dom = Domain("hamming", 10)
    pts = np.repeat(sample_points(dom, 0, 1), 50, axis=0)
    t = build(pts, dom, BuildParams(strategy, b=4), seed=0)
    assert len(t.nodes) == 1 and len(t.nodes[0].bin) == 50
    assert validate_tree(t).ok


def test_empty_dataset_rejected():
    dom = Domain("unit-cube", 2)
    with pytest.raises(ValueError):
        build(np.empty((0, 2)), dom)


def test_bad_params():
    with pytest.raises(ValueError):
        BuildParams("kd")
    with pytest.raises(ValueError):
        BuildParams(b=0)
    with pytest.raises(ValueError):
        BuildParams(h=0)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_capacity_and_validation(strategy):
    dom = Domain("hamming", 16)
    t = build(sample_points(dom, 2, 1000), dom, BuildParams(strategy, b=16), seed=0)
    assert validate_tree(t).ok
    for i in t.leaves:
        nd = t.nodes[i]
        assert len(nd.bin) <= 16 or nd.depth == t.params.h
    assert sorted(np.concatenate([t.nodes[i].bin for i in t.leaves]).tolist()) == list(range(1000))


def test_depth_cap():
    dom = Domain("unit-cube", 4)
    t = build(sample_points(dom, 0, 300), dom, BuildParams("vp", b=1, h=3), seed=0)
    assert t.depth <= 3 and validate_tree(t).ok


def test_flipped_sign_detected(ham12):
    dom, pts, trees = ham12
    t = trees["vp"]
    i = next(i for i, nd in enumerate(t.nodes) if isinstance(nd, Internal) and nd.depth == 2)
    nd = t.nodes[i]
    nodes = list(t.nodes)
    nodes[i] = Internal(VantagePair(dom, nd.f.minus, nd.f.plus), nd.minus, nd.plus, nd.depth)
    rep = validate_tree(replace(t, nodes=nodes))
    assert not rep.ok
    assert [(v.node, v.kind) for v in rep.violations] == [(i, "sign")]


def test_dropped_point_detected(ham12):
    dom, pts, trees = ham12
    t = trees["ball"]
    leaf = t.leaves[0]
    dropped = int(t.nodes[leaf].bin[0])
    nodes = list(t.nodes)
    nodes[leaf] = Leaf(t.nodes[leaf].bin[1:], t.nodes[leaf].depth)
    rep = validate_tree(replace(t, nodes=nodes))
    assert not rep.ok
    assert any(v.kind == "coverage" and str(dropped) in v.detail for v in rep.violations)


def test_bad_arity_detected(ham12):
    t = ham12[2]["pivot"]
    i = next(i for i, nd in enumerate(t.nodes) if isinstance(nd, Internal))
    nodes = list(t.nodes)
    nodes[i] = Internal(t.nodes[i].f, t.nodes[i].minus, t.nodes[i].minus, t.nodes[i].depth)
    assert any(v.kind == "arity" for v in validate_tree(replace(t, nodes=nodes)).violations)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_range_matches_linear_scan(ham12, strategy):
    dom, pts, trees = ham12
    rng = stream(3, "q")
    qs = dom.sample(rng, 200)
    for w, r in zip(qs, rng.uniform(0.01, 0.6, 200)):
        got, tr = range_search(trees[strategy], RangeQuery(w, r))
        assert np.array_equal(got, linear_scan(dom, pts, RangeQuery(w, r)))
        assert tr.result_size == len(got) and tr.cost >= tr.result_size
        assert tr.bins_opened <= trees[strategy].leaf_count


def test_strict_boundary(ham12):
    dom, pts, trees = ham12
    w = pts[5]
    r = dom.distance(w, pts[9])
    got, _ = range_search(trees["vp"], RangeQuery(w, r))
    assert 9 not in got
    assert np.array_equal(got, linear_scan(dom, pts, RangeQuery(w, r)))


def test_huge_radius_opens_everything(ham12):
    dom, pts, trees = ham12
    t = trees["vp"]
    got, tr = range_search(t, RangeQuery(pts[0], 2.0))
    assert len(got) == len(pts) and tr.bins_opened == t.leaf_count


def test_tiny_radius_is_empty():
    dom = Domain("unit-cube", 3)
    pts = sample_points(dom, 1, 100)
    t = build(pts, dom, BuildParams("vp", b=4))
    got, tr = range_search(t, RangeQuery(np.full(3, 2.0), 1e-6))
    assert len(got) == 0 and tr.bins_opened >= 0


def test_radius_must_be_positive():
    with pytest.raises(ValueError):
        RangeQuery(np.zeros(2), 0.0)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_nn_matches_linear(ham12, strategy):
    dom, pts, trees = ham12
    for w in dom.sample(stream(8, "nn"), 100):
        res = nn_search(trees[strategy], w)
        i, dist = linear_nn(dom, pts, w)
        assert (res.index, res.distance) == (i, dist)
        assert res.trace.rounds and sum(r.cost for r in res.trace.rounds) == res.trace.cost


def test_nn_of_datapoint(ham12):
    dom, pts, trees = ham12
    res = nn_search(trees["ball"], pts[17])
    assert res.distance == 0 and pts[res.index].tobytes() == pts[17].tobytes()


def test_nn_tie_goes_to_smaller_index():
    dom = Domain("unit-cube", 1)
    pts = np.array([[0.9], [0.3], [0.5], [0.7], [0.1]])
    t = build(pts, dom, BuildParams("vp", b=1), seed=0)
    assert nn_search(t, np.array([0.6])).index == 2


@pytest.mark.parametrize("kind", ["unit-cube", "sphere", "gaussian"])
@pytest.mark.parametrize("strategy", STRATEGIES)
def test_real_domains(kind, strategy):
    dom = Domain(kind, 5)
    pts = sample_points(dom, 2, 300)
    t = build(pts, dom, BuildParams(strategy, b=8), seed=4)
    assert validate_tree(t).ok
    for w in dom.sample(stream(1, kind), 30):
        assert nn_search(t, w)[:2] == linear_nn(dom, pts, w)


def test_linear_scan_edge_cases():
    dom = Domain("unit-cube", 2)
    assert len(linear_scan(dom, np.empty((0, 2)), RangeQuery(np.zeros(2), 1.0))) == 0
    pts = sample_points(dom, 0, 20)
    got = linear_scan(dom, pts, RangeQuery(np.zeros(2), dom.diameter + 1))
    assert got.tolist() == list(range(20))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), radii=st.lists(st.floats(0.01, 0.8), min_size=2, max_size=6))
def test_cost_monotone_in_radius(ham12, seed, radii):
    dom, pts, trees = ham12
    w = dom.sample(stream(seed, "mono"), 1)[0]
    for t in trees.values():
        costs = [range_search(t, RangeQuery(w, r))[1].cost for r in sorted(radii)]
        assert costs == sorted(costs)


def test_worst_case_counters(ham12):
    dom, pts, trees = ham12
    for t in trees.values():
        _, tr = range_search(t, RangeQuery(pts[0], 5.0))
        assert tr.distance_computations <= len(pts)
        assert tr.decision_evaluations <= t.internal_count


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_pruned_subtrees_hold_no_answers(ham12, strategy):
    dom, pts, trees = ham12
    t = trees[strategy]
    for w, r in zip(dom.sample(stream(2, "prune"), 50), np.linspace(0.05, 0.5, 50)):
        _, tr = range_search(t, RangeQuery(w, r), record_pruned=True)
        for node in tr.pruned:
            below = t.subtree_points(node)
            assert np.all(dom.distances(w, pts[below]) >= r)


def test_concurrent_queries_agree(ham12):
    dom, pts, trees = ham12
    t = trees["vp"]
    qs = dom.sample(stream(5, "threads"), 64)
    serial = [nn_search(t, w) for w in qs]
    with ThreadPoolExecutor(4) as ex:
        parallel = list(ex.map(lambda w: nn_search(t, w), qs))
    assert serial == parallel


def test_build_is_deterministic():
    dom = Domain("sphere", 6)
    pts = sample_points(dom, 0, 200)
    a, b = (build(pts, dom, BuildParams("pivot", b=8), seed=3) for _ in range(2))
    from mcl.treeio import dumps

    assert dumps(a) == dumps(b)
