import numpy as np
import pytest

from mcl import treeio
from mcl.domains import KINDS, Domain, sample_points
from mcl.rng import stream
from mcl.tree import STRATEGIES, BuildParams, build, nn_search


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("strategy", STRATEGIES)
def test_roundtrip_bit_exact(tmp_path, kind, strategy):
    dom = Domain(kind, 70 if kind == "hamming" else 4)
    pts = sample_points(dom, 1, 200)
    t = build(pts, dom, BuildParams(strategy, b=8), seed=2)
    path = tmp_path / "t.mct"
    treeio.save(path, t)
    back = treeio.load(path, pts)
    assert treeio.dumps(back) == path.read_bytes()
    for w in dom.sample(stream(0, "io"), 20):
        assert nn_search(back, w) == nn_search(t, w)


def test_rejects_wrong_points():
    dom = Domain("hamming", 20)
    pts = sample_points(dom, 1, 50)
    data = treeio.dumps(build(pts, dom))
    with pytest.raises(treeio.TreeFormatError):
        treeio.loads(data, sample_points(dom, 2, 50))


def test_rejects_corruption():
    dom = Domain("unit-cube", 3)
    pts = sample_points(dom, 1, 50)
    data = treeio.dumps(build(pts, dom, BuildParams(b=4)))
    with pytest.raises(treeio.TreeFormatError):
        treeio.loads(b"XXXX" + data[4:], pts)
    with pytest.raises(treeio.TreeFormatError):
        treeio.loads(data[:-3], pts)
    with pytest.raises(treeio.TreeFormatError):
        treeio.loads(data + b"\0", pts)
    bumped = data[:4] + (2).to_bytes(2, "little") + data[6:]
    with pytest.raises(treeio.TreeFormatError, match="version"):
        treeio.loads(bumped, pts)
