"""Deterministic table and summary writers.

Floats are written in scientific notation with 17 significant digits so
that a value read back is bit-identical; lines end in LF.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

__all__ = ["fmt", "write_table", "write_json", "jsonable"]


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def jsonable(value):
    """Plain JSON types; complex as ``[re, im]``, non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    return value


def write_json(path, data) -> Path:
    path = Path(path)
    text = json.dumps(jsonable(data), indent=2, sort_keys=True, allow_nan=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_table(directory, name: str, columns, data, fmt_tag: str = "csv") -> Path:
    """Write ``data`` (one sequence per column) as ``name.csv`` or ``name.json``."""
    columns = list(columns)
    cols = [np.asarray(c) for c in data]
    if len(cols) != len(columns):
        raise ValueError("one data sequence per column is required")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    directory = Path(directory)
    if fmt_tag == "json":
        rows = [[jsonable(c[i].item() if hasattr(c[i], "item") else c[i]) for c in cols] for i in range(n)]
        return write_json(directory / f"{name}.json", {"columns": columns, "rows": rows})
    path = directory / f"{name}.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for i in range(n):
            fh.write(",".join(fmt(c[i]) for c in cols) + "\n")
    return path


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
