"""Experiment configuration: defaults, TOML loading and scale presets.

A config file is TOML.  Top-level ``seed`` sets the master seed; each
experiment reads its own table, e.g.::

    seed = 7

    [minima_hunt]
    k_values = [6, 10]
    runs = 50

Unknown keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from ..errors import ConfigError

DEFAULTS: dict[str, dict] = {
    "minima_hunt": {
        "k_values": [6, 10],
        "runs": 50,
        "large_norm_runs": 0,
        "step_scale": 5.0,  # eta = step_scale / k
        "grad_norm_stop": 1e-12,
        "max_iters": 200_000,
        "dedup_tol": 5e-9,
        "bins": 50,
        "workers": 1,
    },
    "conjecture": {
        "k_values": [5],
        "m_values": [2, 5],
        "d": 0,  # 0 means d = k
        "samples": 200,
        "adversarial_samples": 200,
        "variance": 1e-5,
        "eps": 1.0,
        "orthogonal": False,
        "min_gap_decades": 2.0,
        "bins": 50,
    },
    "pgd": {
        "k": 2,
        "m": 2,
        "d": 20,
        "eps": 0.1,
        "delta": 0.01,
        "runs": 50,
        "estimate_samples": 100,
        "safety": 0.5,
        "max_iters": 5000,
        "practical_step": 0.0,  # 0 means 1 / L
        "success_rate": 0.95,
        "log_stride": 500,
    },
    "witness": {
        "k": 2,
        "d": 2,
        "alphas": [0.25, 0.5, 1.0],
        "nonconvex_eps": [1e-1, 1e-2, 1e-3],
        "sweep_eps": [1e-1, 1e-2, 1e-3, 1e-4],
        "sweep_alpha1": 0.5,
        "sweep_alpha2": 0.5,
        "formula_rtol": 1e-8,
        "slope_band": 0.2,
    },
    "probe": {
        "kind": "nonconvexity",  # nonconvexity | opsc | pl | curvature
        "k": 2,
        "d": 2,
        "alpha1": 0.5,
        "alpha2": 0.5,
        "eps": 0.1,
        "m": 2,
        "mode": "gaussian",
        "variance": 1e-5,
        "orthogonal": False,
    },
    "split_certify": {
        "k_values": [6, 10],
        "runs": 50,
        "alphas": [0.25, 0.5, 0.75],
        "step_scale": 5.0,
        "grad_norm_stop": 1e-12,
        "max_iters": 200_000,
        "dedup_tol": 5e-9,
        "params_file": "",
        "teacher_k": 0,
    },
    "spectrum": {
        "point": "teacher",  # teacher | file
        "k": 3,
        "d": 0,
        "params_file": "",
        "teacher_k": 0,
        "bins": 50,
    },
}

PAPER_SCALE: dict[str, dict] = {
    "minima_hunt": {"k_values": list(range(6, 101)), "runs": 500, "large_norm_runs": 100},
    "conjecture": {"k_values": [5], "m_values": [2, 5, 10], "samples": 1000,
                   "adversarial_samples": 1000},
    "split_certify": {"k_values": list(range(6, 101)), "runs": 500},
}


def load_file(path: str | Path | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def resolve(experiment: str, raw: dict | None = None, paper_scale: bool = False,
            seed: int | None = None) -> dict:
    """Merge defaults, optional paper-scale preset, file values and a seed override."""
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    raw = raw or {}
    cfg = copy.deepcopy(DEFAULTS[experiment])
    if paper_scale:
        cfg.update(copy.deepcopy(PAPER_SCALE.get(experiment, {})))
    section = raw.get(experiment, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{experiment}] must be a table")
    unknown = set(section) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown keys in [{experiment}]: {sorted(unknown)}")
    for key, val in section.items():
        if isinstance(cfg[key], bool) != isinstance(val, bool):
            raise ConfigError(f"{experiment}.{key} has the wrong type")
        cfg[key] = val
    master = raw.get("seed", 0) if seed is None else seed
    if not isinstance(master, int) or master < 0 or master >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg["seed"] = master
    for key in ("runs", "samples", "adversarial_samples", "estimate_samples", "bins"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 0):
            raise ConfigError(f"{experiment}.{key} must be a nonnegative integer")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()
