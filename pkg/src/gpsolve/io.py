"""Deterministic CSV/JSON emission and field files.

Floats are written with ``repr`` (shortest round-trip form, '.' decimal
separator) so identical inputs give byte-identical files. Non-finite
values become ``nan``/``inf`` in CSV and ``null``/strings in JSON.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .grid import Grid

__all__ = ["fmt", "write_csv", "read_csv", "to_jsonable", "write_json",
           "write_field", "read_field"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n")


def _coord_columns(grid: Grid):
    if grid.domain.kind == "ball":
        return ["r"], [grid.coords[0]]
    if grid.domain.kind == "interval":
        return ["x"], [grid.coords[0]]
    return ["x", "y"], [grid.points[:, 0], grid.points[:, 1]]


def write_field(path, grid: Grid, f) -> None:
    """One row per node: coordinates then ``value`` (real) or ``re,im`` (complex)."""
    f = grid.check(np.asarray(f))
    names, cols = _coord_columns(grid)
    if np.iscomplexobj(f):
        header, vals = names + ["re", "im"], [f.real, f.imag]
    else:
        header, vals = names + ["value"], [f]
    write_csv(path, header, zip(*cols, *vals))


def read_field(path, grid: Grid) -> np.ndarray:
    header, data = read_csv(path)
    data = data.reshape(-1, len(header))
    names, _ = _coord_columns(grid)
    if header[:len(names)] != names or data.shape[0] != grid.size:
        raise ValueError(f"field file {path} does not match the grid")
    if header[-2:] == ["re", "im"]:
        return data[:, -2] + 1j * data[:, -1]
    return data[:, -1].copy()
