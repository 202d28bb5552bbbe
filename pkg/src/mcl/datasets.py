"""Dataset files.

Text layout::

    kind,d,n,seed
    <point>
    ...

where a Hamming point is a hex string of its bits (bit 0 is the most
significant bit of the first hex digit, zero-padded to a multiple of four) and
any other point is a comma-separated list of ``repr`` floats, which round-trips
exactly.

Binary layout (little endian): magic ``MCL1``, ``u8`` kind code, ``u32 d``,
``u64 n``, ``u64 seed``, then ``n * width`` payload words (``u64`` for Hamming,
``f64`` otherwise).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mcl.domains import KINDS, Domain

MAGIC = b"MCL1"
_HEADER = struct.Struct("<4sBIQQ")


class DatasetFormatError(ValueError):
    pass


@dataclass
class Dataset:
    domain: Domain
    points: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return len(self.points)


def _bits_to_hex(bits: np.ndarray) -> str:
    width = (len(bits) + 3) // 4
    padded = np.zeros(width * 4, dtype=np.uint8)
    padded[: len(bits)] = bits
    nibbles = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1], dtype=np.uint8)
    return "".join("0123456789abcdef"[v] for v in nibbles)


def _hex_to_bits(rows: list[str], d: int) -> np.ndarray:
    width = (d + 3) // 4
    for text in rows:
        if len(text) != width:
            raise DatasetFormatError(f"hex point {text!r} has wrong length for d={d}")
    pad = "0" if width % 2 else ""
    try:
        raw = bytes.fromhex("".join(t + pad for t in rows))
    except ValueError as exc:
        raise DatasetFormatError("bad hex point") from exc
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8)).reshape(len(rows), -1)
    if bits[:, d:].any():
        raise DatasetFormatError(f"hex point sets bits beyond d={d}")
    return bits[:, :d]


def write_text(path, ds: Dataset) -> None:
    dom = ds.domain
    lines = [f"{dom.kind},{dom.d},{ds.n},{ds.seed}"]
    if dom.is_bits:
        lines += [_bits_to_hex(b) for b in dom.unpack(ds.points)]
    else:
        lines += [",".join(repr(float(v)) for v in row) for row in ds.points]
    Path(path).write_text("\n".join(lines) + "\n")


def read_text(path) -> Dataset:
    rows = Path(path).read_text().splitlines()
    if not rows:
        raise DatasetFormatError("empty dataset file")
    try:
        kind, d, n, seed = rows[0].split(",")
        d, n, seed = int(d), int(n), int(seed)
    except ValueError as exc:
        raise DatasetFormatError(f"bad header line {rows[0]!r}") from exc
    dom = Domain(kind, d)
    body = [r for r in rows[1:] if r.strip()]
    if len(body) != n:
        raise DatasetFormatError(f"header says n={n}, found {len(body)} points")
    if dom.is_bits:
        bits = _hex_to_bits([r.strip() for r in body], d)
        points = dom.pack(bits)
    else:
        points = np.array([[float(v) for v in r.split(",")] for r in body], dtype=np.float64).reshape(n, d)
    return Dataset(dom, dom.check(points) if n else points, seed)


def write_binary(path, ds: Dataset) -> None:
    dom = ds.domain
    header = _HEADER.pack(MAGIC, KINDS.index(dom.kind), dom.d, ds.n, ds.seed)
    payload = np.ascontiguousarray(ds.points.astype("<u8" if dom.is_bits else "<f8")).tobytes()
    Path(path).write_bytes(header + payload)


def read_binary(path) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise DatasetFormatError("not an MCL1 dataset")
    _, code, d, n, seed = _HEADER.unpack_from(raw)
    if code >= len(KINDS):
        raise DatasetFormatError(f"unknown kind code {code}")
    dom = Domain(KINDS[code], d)
    expected = _HEADER.size + n * dom.width * 8
    if len(raw) != expected:
        raise DatasetFormatError(f"payload size mismatch: {len(raw)} bytes, expected {expected}")
    arr = np.frombuffer(raw, dtype="<u8" if dom.is_bits else "<f8", offset=_HEADER.size)
    points = arr.astype(dom.dtype).reshape(n, dom.width)
    return Dataset(dom, dom.check(points) if n else points, seed)


def read(path) -> Dataset:
    """Read either format, sniffing the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_binary(path) if head == MAGIC else read_text(path)


def write(path, ds: Dataset, binary: bool = False) -> None:
    (write_binary if binary else write_text)(path, ds)
