"""Binary grid dumps.

Layout (little-endian): b"SCAG", u32 version (1), u8 ndim, u64 size per axis,
then the row-major amplitudes as interleaved float64 (re, im) pairs.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..lattice import Grid, WaveField

MAGIC = b"SCAG"
VERSION = 1


class DumpFormatError(ValueError):
    pass


def encode(field: WaveField) -> bytes:
    g = field.grid
    head = MAGIC + struct.pack("<IB", VERSION, g.ndim) + struct.pack(f"<{g.ndim}Q", *g.shape)
    body = np.ascontiguousarray(field.psi, dtype="<c16").tobytes()
    return head + body


def decode(data: bytes) -> WaveField:
    if data[:4] != MAGIC:
        raise DumpFormatError("not a grid dump (bad magic)")
    if len(data) < 9:
        raise DumpFormatError("truncated header")
    version, ndim = struct.unpack_from("<IB", data, 4)
    if version != VERSION:
        raise DumpFormatError(f"unsupported dump version {version}")
    if not 1 <= ndim <= 3:
        raise DumpFormatError(f"bad axis count {ndim}")
    off = 9 + 8 * ndim
    if len(data) < off:
        raise DumpFormatError("truncated header")
    shape = struct.unpack_from(f"<{ndim}Q", data, 9)
    n = int(np.prod(shape))
    if len(data) != off + 16 * n:
        raise DumpFormatError(f"expected {n} cells, payload is {len(data) - off} bytes")
    psi = np.frombuffer(data, dtype="<c16", offset=off, count=n).reshape(shape)
    return WaveField(Grid(tuple(int(s) for s in shape)), psi.astype(np.complex128))


def write_dump(path, field: WaveField) -> None:
    Path(path).write_bytes(encode(field))


def read_dump(path) -> WaveField:
    return decode(Path(path).read_bytes())
