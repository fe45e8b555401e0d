"""Binary field files.

Layout (little endian): b"DQF1", u32 version, u64 n, f64 L, f64 t, u8 side
(0 = position, 1 = frequency), then n pairs of f64 (re, im).
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import ComplexField, Grid, Side

MAGIC = b"DQF1"
VERSION = 1
_HEADER = struct.Struct("<4sIQddB")


class FieldFormatError(ValueError):
    pass


def dump_field(f: ComplexField, path) -> Path:
    path = Path(path)
    head = _HEADER.pack(MAGIC, VERSION, f.grid.n, f.grid.L, float(f.t), f.side.value)
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    path.write_bytes(head + body)
    return path


def load_field(path) -> ComplexField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: file has {len(raw)} bytes, header needs {_HEADER.size}")
    magic, version, n, L, t, side = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: format version {version} is not supported (reader is version {VERSION})")
    expected = _HEADER.size + 16 * n
    if len(raw) != expected:
        raise FieldFormatError(f"{path}: expected {expected} bytes for n={n}, got {len(raw)}")
    vals = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size, count=n)
    return ComplexField(Grid(n, L), vals, Side(side), t)
