"""Run configuration: JSON file keys, defaults, and flag merging.

Config file keys (all optional): grid_tau, q_fpca, k_grid, k_boot_factor,
B, alpha, method, model, n_projections, seed, eta.  CLI flags override file
values, which override the defaults.
"""

from __future__ import annotations

import json

from .errors import DataError, ParameterError

METHODS = ("lp-l1", "lp-l2", "lp-linf", "lambda", "depth")
MODELS = ("fnp", "sfpl")

DEFAULTS = {
    "grid_tau": 24,
    "q_fpca": 4,
    "k_grid": [2, 4, 8, 16, 32, 64],
    "k_boot_factor": 2.0,
    "B": 500,
    "alpha": 0.05,
    "method": "lp-linf",
    "model": "fnp",
    "n_projections": 20,
    "seed": 20120101,
    "eta": 1e-4,
}

_TYPES = {
    "grid_tau": int,
    "q_fpca": int,
    "k_grid": list,
    "k_boot_factor": (int, float),
    "B": int,
    "alpha": (int, float),
    "method": str,
    "model": str,
    "n_projections": int,
    "seed": int,
    "eta": (int, float),
}


def validate_config(cfg: dict) -> dict:
    for key, value in cfg.items():
        if key not in DEFAULTS:
            raise ParameterError(f"unknown config key {key!r}")
        if not isinstance(value, _TYPES[key]) or isinstance(value, bool):
            raise ParameterError(f"config key {key!r} has wrong type: {value!r}")
    if "k_grid" in cfg:
        if not cfg["k_grid"] or not all(
            isinstance(k, int) and k >= 1 for k in cfg["k_grid"]
        ):
            raise ParameterError("k_grid must be a nonempty list of positive integers")
    if "method" in cfg and cfg["method"] not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {cfg['method']!r}")
    if "model" in cfg and cfg["model"] not in MODELS:
        raise ParameterError(f"model must be one of {MODELS}, got {cfg['model']!r}")
    if "alpha" in cfg and not 0.0 < cfg["alpha"] < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {cfg['alpha']!r}")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParameterError(f"config {path} must hold a JSON object")
    return validate_config(raw)


def merge_config(file_cfg: dict | None = None, **overrides) -> dict:
    """Defaults <- config file <- non-None flag overrides."""
    cfg = dict(DEFAULTS)
    if file_cfg:
        cfg.update(file_cfg)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    return validate_config(cfg)
