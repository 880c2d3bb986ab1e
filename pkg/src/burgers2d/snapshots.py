"""Snapshot files: one field per file, self-describing header, text or raw
payload.

Layout (text mode)::

    BURG2D v1 text
    n1 4
    n2 3
    x1_min -1
    x2_min 0
    h1 0.5
    h2 0.25
    t 1.5
    <n1 lines of n2 values, %.17g>

Raw mode swaps the payload for "data\\n" followed by n1*n2 little-endian
float64 in row-major order; that round-trips bit-exactly.
"""

from __future__ import annotations

import io
import math

import numpy as np

from .core import CellField, Grid2D

MAGIC = "BURG2D v1"
_HEADER_KEYS = ("n1", "n2", "x1_min", "x2_min", "h1", "h2", "t")


def write_snapshot(path, field: CellField, mode: str = "text") -> None:
    if mode not in ("text", "raw"):
        raise ValueError(f"mode must be text|raw, got {mode!r}")
    g = field.grid
    head = [f"{MAGIC} {mode}",
            f"n1 {g.n1}", f"n2 {g.n2}",
            f"x1_min {g.x1_min!r}", f"x2_min {g.x2_min!r}",
            f"h1 {g.h1!r}", f"h2 {g.h2!r}", f"t {field.time!r}"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(head) + "\n").encode())
        if mode == "text":
            buf = io.StringIO()
            np.savetxt(buf, field.values, fmt="%.17g")
            fh.write(buf.getvalue().encode())
        else:
            fh.write(b"data\n")
            fh.write(field.values.astype("<f8").tobytes())


def read_snapshot(path) -> CellField:
    with open(path, "rb") as fh:
        blob = fh.read()
    nl = blob.index(b"\n")
    first = blob[:nl].decode()
    if not first.startswith(MAGIC):
        raise ValueError(f"not a snapshot file (magic {first!r})")
    mode = first[len(MAGIC):].strip()
    if mode not in ("text", "raw"):
        raise ValueError(f"unknown snapshot mode {mode!r}")
    pos = nl + 1
    head = {}
    for _ in _HEADER_KEYS:
        nl = blob.index(b"\n", pos)
        key, _, val = blob[pos:nl].decode().partition(" ")
        if key not in _HEADER_KEYS:
            raise ValueError(f"unexpected header line {key!r}")
        head[key] = val
        pos = nl + 1
    n1, n2 = int(head["n1"]), int(head["n2"])
    nums = {k: float(head[k]) for k in ("x1_min", "x2_min", "h1", "h2", "t")}
    if not all(math.isfinite(v) for v in nums.values()):
        raise ValueError("non-finite header fields")
    grid = Grid2D(nums["x1_min"], nums["x2_min"], nums["h1"], nums["h2"], n1, n2)
    if mode == "raw":
        nl = blob.index(b"\n", pos)
        if blob[pos:nl] != b"data":
            raise ValueError("raw snapshot missing data marker")
        payload = blob[nl + 1:]
        if len(payload) != n1 * n2 * 8:
            raise ValueError(f"payload holds {len(payload)} bytes, need {n1 * n2 * 8}")
        values = np.frombuffer(payload, dtype="<f8").reshape(n1, n2).copy()
    else:
        values = np.loadtxt(io.BytesIO(blob[pos:]), ndmin=2).reshape(n1, n2)
    return CellField(grid, values, nums["t"])
