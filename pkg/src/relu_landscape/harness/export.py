"""Writing reports: JSON, per-run CSV tables and histogram CSVs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        # NaN and inf are not valid JSON
        return float(obj) if np.isfinite(obj) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def histogram(values, lo: float, hi: float, bins: int) -> list[dict]:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(lo, hi))
    return [{"bin_left": float(edges[b]), "bin_right": float(edges[b + 1]), "count": int(counts[b])}
            for b in range(bins)]


def write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in fields})


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return json.dumps(to_jsonable(v))
    return v


def write_outputs(out_dir: str | Path, report: dict, tables: dict[str, list[dict]]) -> Path:
    """report.json plus one CSV per table; histogram tables should be named hist_*."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report))
    for name, rows in tables.items():
        write_csv(out / f"{name}.csv", rows)
    return out / "report.json"


def load_params(path: str | Path) -> np.ndarray:
    """Student/teacher matrix from .npy or a comma-separated text file."""
    path = Path(path)
    if path.suffix == ".npy":
        return np.atleast_2d(np.load(path))
    return np.atleast_2d(np.loadtxt(path, delimiter=","))
