"""CSV/JSON writers.  Floats are written with ``repr`` so repeated runs
produce byte-identical files."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .paths import TwoSidedPath


def _cell(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "nan" if math.isnan(x) else repr(x)
    if isinstance(x, np.integer):
        return str(int(x))
    return x


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """RFC 4180 CSV (CRLF line ends, header row always present)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=False) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def path_rows(path: TwoSidedPath):
    """``(t, value, side)`` rows in increasing time; ``t = 0`` appears once."""
    dt = path.dt
    left = path.left.values
    for k in range(left.size - 1, 0, -1):
        yield (round(-k * dt, 12), left[k], "left")
    for k, v in enumerate(path.right.values):
        yield (round(k * dt, 12), v, "right")


def write_path_csv(file: Path, path: TwoSidedPath) -> Path:
    return write_csv(file, ("t", "value", "side"), path_rows(path))


def write_field_csv(file: Path, t_grid: np.ndarray, eta: np.ndarray) -> Path:
    return write_csv(file, ("t", "eta"), zip(t_grid, eta))
