"""``MCT1``: a versioned binary format for metric trees.

Layout (little endian)::

    header   magic "MCT1", u16 version, u8 kind, u8 strategy, u32 d,
             u64 n, u64 seed, u32 b, u32 c, u32 h, u32 root, u32 node count,
             32-byte SHA-256 of the point payload
    nodes    u8 tag (0 leaf, 1 internal), u32 depth, then
             leaf:      u32 count, count * i64 point indices
             internal:  u32 minus, u32 plus, u8 variant, payload
                        vantage_pair: plus point, minus point
                        ball / pivot: point, f64 radius or threshold

Points are stored in their native layout (u64 words or f64 coordinates).  The
datapoints themselves are not part of the file; ``load`` takes them and checks
the digest, so a tree cannot be paired with the wrong dataset by accident.
"""
from __future__ import annotations

import hashlib
import io
import struct
from pathlib import Path

import numpy as np

from mcl.decision import Ball, Pivot, VantagePair
from mcl.domains import KINDS, Domain
from mcl.tree import STRATEGIES, BuildParams, Internal, Leaf, MetricTree

MAGIC = b"MCT1"
VERSION = 1
_HEADER = struct.Struct("<4sHBBIQQIIIII32s")
_NODE = struct.Struct("<BI")
_LINKS = struct.Struct("<IIB")
_VARIANTS = ("vantage_pair", "ball", "pivot")


class TreeFormatError(ValueError):
    pass


def points_digest(points: np.ndarray) -> bytes:
    return hashlib.sha256(np.ascontiguousarray(points).astype(points.dtype.newbyteorder("<")).tobytes()).digest()


def _point_bytes(domain: Domain, p) -> bytes:
    return np.asarray(p, dtype=np.dtype(domain.dtype).newbyteorder("<")).tobytes()


def dumps(tree: MetricTree) -> bytes:
    dom, prm = tree.domain, tree.params
    out = io.BytesIO()
    out.write(
        _HEADER.pack(
            MAGIC, VERSION, KINDS.index(dom.kind), STRATEGIES.index(prm.strategy), dom.d, tree.n, tree.seed,
            prm.b, prm.c, prm.h, tree.root, len(tree.nodes), points_digest(tree.points),
        )
    )
    for nd in tree.nodes:
        if isinstance(nd, Leaf):
            out.write(_NODE.pack(0, nd.depth))
            out.write(struct.pack("<I", len(nd.bin)))
            out.write(np.asarray(nd.bin, dtype="<i8").tobytes())
            continue
        f = nd.f
        out.write(_NODE.pack(1, nd.depth))
        out.write(_LINKS.pack(nd.minus, nd.plus, _VARIANTS.index(f.variant)))
        if isinstance(f, VantagePair):
            out.write(_point_bytes(dom, f.plus) + _point_bytes(dom, f.minus))
        elif isinstance(f, Ball):
            out.write(_point_bytes(dom, f.center) + struct.pack("<d", f.radius))
        else:
            out.write(_point_bytes(dom, f.anchor) + struct.pack("<d", f.threshold))
    return out.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise TreeFormatError("truncated tree file")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def loads(data: bytes, points) -> MetricTree:
    r = _Reader(data)
    magic, version, kind, strategy, d, n, seed, b, c, h, root, count, digest = r.unpack(_HEADER)
    if magic != MAGIC:
        raise TreeFormatError("not an MCT1 tree file")
    if version != VERSION:
        raise TreeFormatError(f"unsupported tree format version {version}")
    if kind >= len(KINDS) or strategy >= len(STRATEGIES):
        raise TreeFormatError("bad domain or strategy code")
    dom = Domain(KINDS[kind], d)
    points = dom.check(points)
    if len(points) != n or points_digest(points) != digest:
        raise TreeFormatError("points do not match the dataset the tree was built on")
    psize = dom.width * 8
    ptype = np.dtype(dom.dtype).newbyteorder("<")

    def point():
        return np.frombuffer(r.take(psize), dtype=ptype).astype(dom.dtype)

    nodes = []
    for _ in range(count):
        tag, depth = r.unpack(_NODE)
        if tag == 0:
            (k,) = struct.unpack("<I", r.take(4))
            nodes.append(Leaf(np.frombuffer(r.take(8 * k), dtype="<i8").astype(np.int64), depth))
        elif tag == 1:
            minus, plus, variant = r.unpack(_LINKS)
            if variant == 0:
                f = VantagePair(dom, point(), point())
            elif variant in (1, 2):
                p = point()
                (v,) = struct.unpack("<d", r.take(8))
                f = Ball(dom, p, v) if variant == 1 else Pivot(dom, p, v)
            else:
                raise TreeFormatError(f"unknown decision variant code {variant}")
            if max(minus, plus) >= count:
                raise TreeFormatError("child index out of range")
            nodes.append(Internal(f, minus, plus, depth))
        else:
            raise TreeFormatError(f"unknown node tag {tag}")
    if r.pos != len(data):
        raise TreeFormatError("trailing bytes after the node array")
    params = BuildParams(STRATEGIES[strategy], b, c, h)
    return MetricTree(dom, nodes, root, params, n, seed, points)


def save(path, tree: MetricTree) -> None:
    Path(path).write_bytes(dumps(tree))


def load(path, points) -> MetricTree:
    return loads(Path(path).read_bytes(), points)
