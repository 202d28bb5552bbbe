"""Metric-measure domains used as workloads.

Four kinds are supported, each with a distance normalised so that the mean
distance between two random points is of order one:

============  ===========================  ==================================
kind          points                       distance
============  ===========================  ==================================
hamming       ``{0,1}^d`` packed in uint64  differing bits / d
unit-cube     ``[0,1]^d`` float64           Euclidean / sqrt(d)
gaussian      ``N(0, I_d)`` float64         Euclidean / sqrt(2 d)
sphere        unit sphere in ``R^d``        chord / sqrt(2)
============  ===========================  ==================================

Hamming points are stored bit-packed: bit ``i`` lives in word ``i // 64`` at
position ``i % 64``; padding bits of the last word are always zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from mcl.rng import stream

KINDS = ("hamming", "unit-cube", "gaussian", "sphere")


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DistanceStats:
    mean: float
    std: float
    pairs: int
    seed: int

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.pairs)


@dataclass(frozen=True)
class Domain:
    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d!r}")
        if self.kind == "sphere" and self.d < 2:
            raise ValueError("sphere needs d >= 2")

    # -- representation -------------------------------------------------

    @property
    def is_bits(self) -> bool:
        return self.kind == "hamming"

    @cached_property
    def width(self) -> int:
        """Length of the stored point vector (words for Hamming, d otherwise)."""
        return (self.d + 63) // 64 if self.is_bits else self.d

    @property
    def dtype(self):
        return np.uint64 if self.is_bits else np.float64

    @cached_property
    def _denom(self) -> float:
        return {
            "hamming": float(self.d),
            "unit-cube": math.sqrt(self.d),
            "gaussian": math.sqrt(2 * self.d),
            "sphere": math.sqrt(2.0),
        }[self.kind]

    @property
    def scale(self) -> float:
        """Normalisation constant applied to the raw metric."""
        return 1.0 / self._denom

    @property
    def diameter(self) -> float:
        return {"hamming": 1.0, "unit-cube": 1.0, "gaussian": math.inf, "sphere": math.sqrt(2.0)}[self.kind]

    @cached_property
    def _tail_mask(self) -> np.uint64:
        r = self.d % 64
        return np.uint64((1 << r) - 1 if r else 2**64 - 1)

    def pack(self, bits) -> np.ndarray:
        """Pack 0/1 arrays of shape (..., d) into Hamming points."""
        if not self.is_bits:
            raise TypeError("pack() only applies to hamming domains")
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape[-1] != self.d:
            raise DimensionMismatch(f"expected {self.d} bits, got {bits.shape[-1]}")
        if np.any(bits > 1):
            raise ValueError("bit entries must be 0 or 1")
        lead = bits.shape[:-1]
        padded = np.zeros(lead + (self.width * 64,), dtype=np.uint8)
        padded[..., : self.d] = bits
        packed = np.packbits(padded, axis=-1, bitorder="little")
        return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(lead + (self.width,))

    def unpack(self, points) -> np.ndarray:
        if not self.is_bits:
            raise TypeError("unpack() only applies to hamming domains")
        points = np.asarray(points, dtype=np.uint64)
        raw = np.ascontiguousarray(points.astype("<u8")).view(np.uint8)
        bits = np.unpackbits(raw, axis=-1, bitorder="little")
        return bits[..., : self.d]

    def point(self, value) -> np.ndarray:
        """Build a single point from a bitstring (Hamming) or a sequence of reals."""
        if self.is_bits:
            if isinstance(value, str):
                value = [int(ch) for ch in value]
            return self.pack(np.asarray(value))
        p = np.asarray(value, dtype=np.float64)
        return self.check(p)

    def check(self, points) -> np.ndarray:
        """Validate points (single or batch) and return them as an array."""
        points = np.asarray(points)
        if points.ndim not in (1, 2) or points.shape[-1] != self.width:
            raise DimensionMismatch(
                f"{self.kind} d={self.d} expects vectors of length {self.width}, got shape {points.shape}"
            )
        if self.is_bits:
            if points.dtype != np.uint64:
                raise TypeError("hamming points must be packed uint64 words")
            if np.any(points[..., -1] & ~self._tail_mask):
                raise ValueError("padding bits set beyond dimension")
        else:
            points = points.astype(np.float64, copy=False)
            if not np.all(np.isfinite(points)):
                raise ValueError("points must have finite entries")
        return points

    # -- metric ---------------------------------------------------------

    def raw_distances(self, x, ys) -> np.ndarray:
        """Un-normalised distances: bit counts (int64) or Euclidean norms."""
        if self.is_bits:
            return np.bitwise_count(ys ^ x).sum(axis=-1, dtype=np.int64)
        diff = ys - x
        return np.sqrt((diff * diff).sum(axis=-1))

    def distances(self, x, ys) -> np.ndarray:
        """Distances from one point ``x`` to each row of ``ys``."""
        return self.raw_distances(x, ys) / self._denom

    def paired_distances(self, xs, ys) -> np.ndarray:
        """Row-wise distances ``rho(xs[i], ys[i])``."""
        if self.is_bits:
            return np.bitwise_count(xs ^ ys).sum(axis=-1, dtype=np.int64) / self._denom
        diff = xs - ys
        return np.sqrt((diff * diff).sum(axis=-1)) / self._denom

    def distance(self, x, y) -> float:
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != (self.width,) or y.shape != (self.width,):
            raise DimensionMismatch(
                f"{self.kind} d={self.d} expects vectors of length {self.width}, got {x.shape} and {y.shape}"
            )
        return float(self.distances(x, y[None, :])[0])

    def cdist(self, xs, ys) -> np.ndarray:
        """All-pairs distances, shape ``(len(xs), len(ys))``."""
        return np.stack([self.distances(x, ys) for x in xs]) if len(xs) else np.empty((0, len(ys)))

    # -- measure --------------------------------------------------------

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. points from the canonical measure using ``rng``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        if self.is_bits:
            words = rng.integers(0, 2**64, size=(n, self.width), dtype=np.uint64, endpoint=False)
            words[:, -1] &= self._tail_mask
            return words
        if self.kind == "unit-cube":
            return rng.random((n, self.d))
        g = rng.standard_normal((n, self.d))
        if self.kind == "gaussian":
            return g
        return g / np.linalg.norm(g, axis=1, keepdims=True)


def distance(domain: Domain, x, y) -> float:
    return domain.distance(x, y)


def sample_points(domain: Domain, seed: int, n: int, purpose: str = "points") -> np.ndarray:
    """Deterministic i.i.d. sample of ``n`` points for ``(domain, seed)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return domain.sample(stream(seed, purpose, domain.kind, domain.d), n)


def mean_distance_estimate(domain: Domain, seed: int, pairs: int) -> DistanceStats:
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    rng = stream(seed, "mean-distance", domain.kind, domain.d)
    xs = domain.sample(rng, pairs)
    ys = domain.sample(rng, pairs)
    dist = domain.paired_distances(xs, ys)
    std = float(dist.std(ddof=1)) if pairs > 1 else 0.0
    return DistanceStats(mean=float(dist.mean()), std=std, pairs=pairs, seed=seed)
