"""Layered configuration: frozen profile defaults < config file < flags."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, is_dataclass, replace
from importlib import resources
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from .metrics import DEFAULT_THRESHOLDS
from .model import ALGORITHMS, DetectionParams, InvalidParams


class ConfigError(ValueError):
    pass


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


# sub-record holding each algorithm's own parameters
ALGORITHM_SUBRECORD = {"a1": "a1", "a2": "a2", "dbscan": "dbscan", "kmeanspp": "kmeans"}


def _param_types() -> Dict[str, type]:
    out = {}
    base = DetectionParams()
    for f in fields(DetectionParams):
        value = getattr(base, f.name)
        if is_dataclass(value):
            for sub in fields(value):
                out[f"{f.name}.{sub.name}"] = type(getattr(value, sub.name))
        elif f.name == "weekend_days":
            out[f.name] = list
        else:
            out[f.name] = type(value)
    return out


PARAM_TYPES = _param_types()
PARAM_KEYS = tuple(PARAM_TYPES)

APP_TYPES = {
    "algorithm": str,
    "input": str,
    "ground_truth": str,
    "output_dir": str,
    "thresholds": list,
    "seed": int,
    "workers": int,
    "train_fraction": float,
}


def _coerce(key: str, value, expected: type):
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if isinstance(value, str):
                try:
                    return float(value)
                except ValueError:
                    pass
            raise TypeMismatch(f"{key}: expected a number, got {value!r}")
        return float(value)
    if expected is int:
        if isinstance(value, bool):
            raise TypeMismatch(f"{key}: expected an integer, got {value!r}")
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        if not isinstance(value, int):
            raise TypeMismatch(f"{key}: expected an integer, got {value!r}")
        return value
    if expected is str:
        if not isinstance(value, str):
            raise TypeMismatch(f"{key}: expected a string, got {value!r}")
        return value
    if expected is list:
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            raise TypeMismatch(f"{key}: expected a list, got {value!r}")
        item = int if key == "weekend_days" else float
        return [_coerce(key, v, item) for v in value]
    raise TypeError(expected)


def flatten(tree: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Nested mapping to dotted keys, leaving the ``sweep`` section intact."""
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping) and key != "sweep":
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def params_from_flat(flat: Mapping[str, Any], base: DetectionParams = DetectionParams()) -> DetectionParams:
    """Overlay dotted-key values on ``base``."""
    top: Dict[str, Any] = {}
    subs: Dict[str, Dict[str, Any]] = {}
    for key, value in flat.items():
        if key not in PARAM_TYPES:
            raise UnknownKey(f"unknown parameter {key!r}")
        value = _coerce(key, value, PARAM_TYPES[key])
        if "." in key:
            rec, name = key.split(".", 1)
            subs.setdefault(rec, {})[name] = value
        else:
            top[key] = frozenset(value) if key == "weekend_days" else value
    for rec, values in subs.items():
        top[rec] = replace(getattr(base, rec), **values)
    try:
        return replace(base, **top)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None


def params_to_tree(p: DetectionParams) -> dict:
    tree: Dict[str, Any] = {}
    for f in fields(DetectionParams):
        value = getattr(p, f.name)
        if is_dataclass(value):
            tree[f.name] = {s.name: getattr(value, s.name) for s in fields(value)}
        elif f.name == "weekend_days":
            tree[f.name] = sorted(value)
        else:
            tree[f.name] = value
    return tree


def read_yaml(path) -> dict:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise TypeMismatch(f"{path}: top level must be a mapping")
    return data


def load_profile(path) -> Tuple[str, DetectionParams]:
    """Read a profile file: ``algorithm`` plus DetectionParams keys."""
    flat = flatten(read_yaml(path))
    algorithm = flat.pop("algorithm", "ghost")
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"{path}: unknown algorithm {algorithm!r}")
    return algorithm, params_from_flat(flat)


def write_profile(path, algorithm: str, params: DetectionParams) -> None:
    tree = {"algorithm": algorithm, **params_to_tree(params)}
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(tree, fh, sort_keys=False, default_flow_style=False)


def frozen_profile(algorithm: str) -> DetectionParams:
    """Shipped frozen parameters for ``algorithm``."""
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    ref = resources.files("ghosthome") / "profiles" / f"{algorithm}.yaml"
    with resources.as_file(ref) as path:
        return load_profile(path)[1]


def frozen_profiles() -> Dict[str, DetectionParams]:
    return {a: frozen_profile(a) for a in ALGORITHMS}


def expand_grid_key(algorithm: str, key: str) -> str:
    """Short sweep names (``eps_m``) resolve to the algorithm's sub-record."""
    if key in PARAM_TYPES:
        return key
    rec = ALGORITHM_SUBRECORD.get(algorithm)
    if rec and f"{rec}.{key}" in PARAM_TYPES:
        return f"{rec}.{key}"
    raise UnknownKey(f"sweep.{algorithm}: unknown parameter {key!r}")


def parse_sweep(section: Mapping[str, Any]) -> Dict[str, Dict[str, list]]:
    if not isinstance(section, Mapping):
        raise TypeMismatch("sweep: expected a mapping of algorithm -> parameter lists")
    grid: Dict[str, Dict[str, list]] = {}
    for algorithm, params in section.items():
        if algorithm not in ALGORITHMS:
            raise UnknownKey(f"sweep: unknown algorithm {algorithm!r}")
        params = params or {}
        if not isinstance(params, Mapping):
            raise TypeMismatch(f"sweep.{algorithm}: expected a mapping")
        entry = {}
        for key, values in params.items():
            full = expand_grid_key(algorithm, key)
            if not isinstance(values, (list, tuple)):
                values = [values]
            entry[full] = [_coerce(full, v, PARAM_TYPES[full]) for v in values]
        grid[algorithm] = entry
    return grid


@dataclass(frozen=True)
class AppConfig:
    algorithm: str = "ghost"
    params: DetectionParams = field(default_factory=DetectionParams)
    inputs: Tuple[str, ...] = ()
    ground_truth: Optional[str] = None
    output_dir: str = "."
    sweep: Optional[Dict[str, Dict[str, list]]] = None
    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    seed: int = 42
    workers: int = 1
    train_fraction: float = 0.8


def resolve_config(file=None, flags: Optional[Mapping[str, Any]] = None) -> AppConfig:
    """Merge shipped defaults, an optional YAML file and explicit flags.

    ``flags`` uses dotted keys (``grid_size``, ``dbscan.eps_m``, ``seed``...);
    ``None`` values are treated as not given. With no file argument the
    ``GHOST_CONFIG`` environment variable is consulted.
    """
    if file is None:
        file = os.environ.get("GHOST_CONFIG") or None
    file_flat = flatten(read_yaml(file)) if file else {}
    flag_flat = {k: v for k, v in (flags or {}).items() if v is not None}

    for key in list(file_flat) + list(flag_flat):
        if key not in PARAM_TYPES and key not in APP_TYPES and key != "sweep":
            raise UnknownKey(f"unknown configuration key {key!r}")

    merged = {**file_flat, **flag_flat}
    algorithm = _coerce("algorithm", merged.get("algorithm", "ghost"), str)
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")

    params = params_from_flat({k: v for k, v in merged.items() if k in PARAM_TYPES},
                              frozen_profile(algorithm))

    app = {k: _coerce(k, merged[k], t) for k, t in APP_TYPES.items() if k in merged}
    thresholds = tuple(app.get("thresholds", DEFAULT_THRESHOLDS))
    if any(not (math.isfinite(t) and t > 0) for t in thresholds):
        raise ConfigError("thresholds must be positive")
    train_fraction = app.get("train_fraction", 0.8)
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must lie strictly between 0 and 1")
    workers = app.get("workers", 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    inputs = merged.get("input")
    return AppConfig(
        algorithm=algorithm,
        params=params,
        inputs=(inputs,) if isinstance(inputs, str) else tuple(inputs or ()),
        ground_truth=app.get("ground_truth"),
        output_dir=app.get("output_dir", "."),
        sweep=parse_sweep(merged["sweep"]) if merged.get("sweep") is not None else None,
        thresholds=thresholds,
        seed=app.get("seed", 42),
        workers=workers,
        train_fraction=train_fraction,
    )
