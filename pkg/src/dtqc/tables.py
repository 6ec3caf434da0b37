"""CSV and JSON serialization.

Floats are written with 17 significant digits so every value read back is the
same double that was written.
"""
from __future__ import annotations

import contextlib
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import DataIOError, SamplingError, ValidationError
from .spectral import check_uniform


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.16e}"
    return str(value)


@contextlib.contextmanager
def _open_out(path):
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    try:
        p = Path(path)
        if p.parent != Path("."):
            p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            yield fh
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, payload):
    def clean(obj):
        if isinstance(obj, dict):
            return {str(k): clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (np.floating, float)):
            x = float(obj)
            return x if math.isfinite(x) else None
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        return obj

    with _open_out(path) as fh:
        json.dump(clean(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataIOError(f"{path} is not valid JSON: {exc}") from exc


def read_csv(path) -> dict:
    """Numeric CSV with a header row, as ``{column: float array}``."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataIOError(f"{path} is empty") from None
            rows = [r for r in reader if r]
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if any(len(r) != len(header) for r in rows):
        raise DataIOError(f"{path}: ragged rows")
    try:
        data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    except ValueError as exc:
        raise DataIOError(f"{path}: non-numeric entry ({exc})") from exc
    return {name: data[:, j].copy() for j, name in enumerate(header)}


def trajectory_columns(traj, names=None):
    """Flatten a trajectory into ``(header, column arrays)``.

    Vector observables expand to ``n_0..n_{N-1}`` (densities) and
    ``c_0..c_{d-1}`` (basis overlaps).
    """
    header, cols = ["t"], [traj.sample_times]
    for name in names or traj.series:
        values = traj.series[name]
        if values.ndim == 1:
            header.append(name)
            cols.append(values)
        else:
            prefix = "n" if name == "densities" else "c"
            for j in range(values.shape[1]):
                header.append(f"{prefix}_{j}")
                cols.append(values[:, j])
    return header, cols


def write_columns(path, header, cols):
    write_csv(path, header, zip(*(c.tolist() for c in cols)))


def series_from_table(table: dict, column: str):
    """``(values, sample_dt)`` from a table holding ``t`` and ``column``."""
    if column not in table:
        raise ValidationError(f"unknown column {column!r}; available: {sorted(table)}")
    if "t" not in table:
        raise ValidationError("input has no 't' column")
    t = table["t"]
    if t.size < 2:
        raise SamplingError("need at least two samples")
    return table[column], check_uniform(t, float(t[1] - t[0]))
