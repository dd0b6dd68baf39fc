"""File formats: solution profiles (CSV), reports (JSON), operator matrices.

CSV numbers are written with 17 significant digits (``%.17g``), which is
locale independent and round-trips every float64.  JSON output is strict:
non-finite floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""
from __future__ import annotations

import json
import math
import struct
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .grid import Grid
from .operator import NonlocalOperator

PROFILE_COLUMNS = ("x", "u", "u0", "lower_barrier", "upper_barrier")
OPERATOR_MAGIC = b"FRACLAP\x01"
_FMT = "%.17g"


@contextmanager
def _open_text(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _finite_or_tag(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _finite_or_tag(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite_or_tag(v) for v in x]
    return x


def dumps_json(obj) -> str:
    """Deterministic strict JSON (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(_finite_or_tag(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path=None) -> None:
    with _open_text(path) as fh:
        fh.write(dumps_json(obj))


def write_profile_csv(path, grid: Grid, u, u0=None, lower=None, upper=None) -> None:
    """Write ``x, u, u0, lower_barrier, upper_barrier`` on the interior nodes.

    Missing columns are written as ``nan``.
    """
    m = grid.size
    cols = [np.asarray(grid.nodes)]
    for c in (u, u0, lower, upper):
        cols.append(np.full(m, np.nan) if c is None else np.asarray(c, dtype=float))
    if any(c.shape != (m,) for c in cols):
        raise ValueError("profile columns must be node vectors on the grid")
    table = np.column_stack(cols)
    with _open_text(path) as fh:
        fh.write(",".join(PROFILE_COLUMNS) + "\n")
        for row in table:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def read_profile_csv(path) -> dict:
    """Read a profile written by :func:`write_profile_csv` into column arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(PROFILE_COLUMNS)}


def export_operator_binary(op: NonlocalOperator, path) -> None:
    """Magic, a length-prefixed JSON header ``{n, s, a, b, c}``, then ``L``
    as row-major little-endian float64."""
    g = op.grid
    header = json.dumps({"n": g.n, "s": op.s, "a": g.a, "b": g.b, "c": op.c,
                         "rows": g.size}, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(OPERATOR_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(op.L, dtype="<f8").tobytes())


def load_operator_binary(path):
    """Inverse of :func:`export_operator_binary`; returns ``(header, L)``."""
    raw = Path(path).read_bytes()
    if raw[:len(OPERATOR_MAGIC)] != OPERATOR_MAGIC:
        raise ValueError(f"{path}: not an operator file")
    pos = len(OPERATOR_MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    header = json.loads(raw[pos:pos + hlen])
    pos += hlen
    m = header["rows"]
    L = np.frombuffer(raw, dtype="<f8", count=m * m, offset=pos).reshape(m, m).copy()
    return header, L


def export_operator_csv(op: NonlocalOperator, path) -> None:
    """Dense ``L`` as CSV, one matrix row per line."""
    with _open_text(path) as fh:
        for row in op.L:
            fh.write(",".join(_FMT % v for v in row) + "\n")
