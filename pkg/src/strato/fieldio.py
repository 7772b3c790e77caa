"""Field snapshot serialization.

Binary layout (little endian throughout):

    bytes 0..3   magic ``SLF1``
    bytes 4..7   u32 points per side n
    bytes 8..15  f64 box half length
    remainder    n*n f64 field values, row major (axis-1 coordinate fastest)

A CSV export is provided for small grids and spreadsheet inspection.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField

__all__ = ["write_snapshot", "read_snapshot", "write_csv"]

_MAGIC = b"SLF1"
_HEADER = struct.Struct("<4sId")


def write_snapshot(f: ScalarField, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(_HEADER.pack(_MAGIC, f.grid.n, f.grid.half_length))
    buf.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    Path(path).write_bytes(buf.getvalue())


def read_snapshot(path: str | Path) -> ScalarField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, n, half_length = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * n * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, n)
    return ScalarField(GridSpec(n, half_length), vals.copy())


def write_csv(f: ScalarField, path: str | Path) -> None:
    """Plain-text export: one ``x1,x2,value`` row per grid point."""
    g = f.grid
    x = g.nodes
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={g.n} half_length={g.half_length!r}\n")
        fh.write("x1,x2,value\n")
        for i in range(g.n):
            for j in range(g.n):
                fh.write(f"{float(x[i])!r},{float(x[j])!r},{float(f.values[i, j])!r}\n")
