"""Seeded random streams.

Every random draw in the library comes from a Philox (counter-based)
generator keyed by a root seed plus a *purpose path*, e.g.
``stream(7, "points", "hamming", 16)``.  Path components are hashed to
32-bit words with CRC-32 and used as the ``spawn_key`` of a
:class:`numpy.random.SeedSequence`, so two different purposes never share a
stream and a purpose's stream does not depend on what else was drawn before.
"""
from __future__ import annotations

import zlib

import numpy as np


def _word(part: object) -> int:
    if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
        v = int(part)
        if 0 <= v < 2**32:
            return v
    return zlib.crc32(repr(part).encode())


def seed_sequence(seed: int, *purpose: object) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_word(p) for p in purpose))


def stream(seed: int, *purpose: object) -> np.random.Generator:
    """Return an independent generator for ``(seed, *purpose)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *purpose)))
