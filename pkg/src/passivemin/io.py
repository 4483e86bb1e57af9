"""CSV observations and canonical JSON."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class CSVFormatError(ValueError):
    pass


def read_observations(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``x1,...,xd,y`` CSV. Data rows are numbered from 1 in errors."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CSVFormatError("empty file: expected a header x1,...,xd,y") from None
        d = len(header) - 1
        expected = [f"x{j}" for j in range(1, d + 1)] + ["y"]
        if d < 1 or header != expected:
            raise CSVFormatError(f"bad header {header}; expected {expected}")
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise CSVFormatError(f"row {lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise CSVFormatError(f"row {lineno}: non-numeric value in {row}") from None
            if not all(math.isfinite(v) for v in vals):
                raise CSVFormatError(f"row {lineno}: non-finite value in {row}")
            rows.append(vals)
    if not rows:
        raise CSVFormatError("no data rows")
    data = np.array(rows)
    return data[:, :d], data[:, d]


def write_observations(path, X, y) -> None:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    d = X.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(1, d + 1)] + ["y"])
        for xi, yi in zip(X, y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
