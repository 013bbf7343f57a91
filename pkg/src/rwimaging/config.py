"""Scenario configuration.

A scenario is a TOML file whose keys are written with dotted section names
(``geometry.depth = 20.0``). Every key has a default; unknown keys and
out-of-range values are rejected with the offending key in the message.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigurationError

KINDS = ("none", "boundary", "medium")
WEIGHT_CHOICES = ("uniform", "ideal", "crossrange", "range", "theory", "optimized")

DEFAULTS: dict[str, Any] = {
    "name": "custom",
    "description": "",
    "geometry.depth": 20.0,
    "perturbation.kind": "none",
    "perturbation.family": "matern72",
    "perturbation.epsilon": 0.0,
    "perturbation.corr_length": 1.0,
    "pulse.shape": "sinc",
    "pulse.relative_band": 0.0625,
    "source.x": 10.0,
    "array.range": 100.0,
    "array.layout": "default",
    "array.count": 39,
    "array.spacing": 0.5,
    "array.decompose": False,
    "frequency.step": 0.0,
    "frequency.samples": 257,
    "frequency.cap": 4096,
    "frequency.dispersion": "linear",
    "image.x_step": 0.125,
    "image.z_step": 0.125,
    "image.z_half": 12.0,
    "window.range": 1.0,
    "window.crossrange": 1.0,
    "window.average": "modulus",
    "montecarlo.realizations": 1,
    "montecarlo.seed": 0,
    "optimizer.max_iter": 500,
    "optimizer.tol": 1e-8,
    "optimizer.fd_step": 1e-4,
    "run.weights": ["uniform"],
    "stats.evanescent_factor": 9,
    "stats.ranges": [50.0, 100.0],
    "stats.per_frequency": False,
    "stats.band_samples": 5,
    "output.dir": "out",
    "output.all_images": False,
}

_CHOICES = {
    "perturbation.kind": KINDS,
    "perturbation.family": ("matern72", "gaussian"),
    "pulse.shape": ("gaussian", "sinc"),
    "array.layout": ("default", "full"),
    "frequency.dispersion": ("linear", "exact"),
    "window.average": ("modulus", "complex"),
}

_POSITIVE = ("geometry.depth", "perturbation.corr_length", "pulse.relative_band", "array.spacing",
             "image.x_step", "image.z_step", "image.z_half", "optimizer.tol", "optimizer.fd_step")
_NONNEGATIVE = ("perturbation.epsilon", "array.range", "frequency.step", "window.range",
                "window.crossrange", "montecarlo.seed")
_MIN_ONE = ("array.count", "montecarlo.realizations", "optimizer.max_iter", "frequency.cap",
            "stats.evanescent_factor", "stats.band_samples")


def _flatten(table: Mapping, prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, value in table.items():
        full = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, full + "."))
        else:
            out[full] = value
    return out


def _coerce(key: str, value: Any) -> Any:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigurationError(f"{key}: expected a list, got {value!r}")
        return list(value)
    if not isinstance(value, str):
        raise ConfigurationError(f"{key}: expected a string, got {value!r}")
    return value


def _validate(v: dict[str, Any]) -> None:
    for key, options in _CHOICES.items():
        if v[key] not in options:
            raise ConfigurationError(f"{key}: must be one of {options}, got {v[key]!r}")
    for key in _POSITIVE:
        if not v[key] > 0:
            raise ConfigurationError(f"{key}: must be positive, got {v[key]}")
    for key in _NONNEGATIVE:
        if v[key] < 0:
            raise ConfigurationError(f"{key}: must be non-negative, got {v[key]}")
    for key in _MIN_ONE:
        if v[key] < 1:
            raise ConfigurationError(f"{key}: must be at least 1, got {v[key]}")
    if not 0 < v["source.x"] < v["geometry.depth"]:
        raise ConfigurationError(f"source.x: must lie in (0, {v['geometry.depth']}), got {v['source.x']}")
    if v["frequency.samples"] < 3:
        raise ConfigurationError("frequency.samples: must be at least 3")
    if v["perturbation.kind"] == "medium" and v["perturbation.family"] != "gaussian":
        raise ConfigurationError("perturbation.family: medium perturbations use the gaussian family")
    if v["perturbation.kind"] == "boundary" and v["perturbation.family"] != "matern72":
        raise ConfigurationError("perturbation.family: boundary perturbations use the matern72 family")
    bad = [w for w in v["run.weights"] if w not in WEIGHT_CHOICES]
    if bad:
        raise ConfigurationError(f"run.weights: unknown choices {bad}; options are {WEIGHT_CHOICES}")
    if v["perturbation.kind"] == "none" and "theory" in v["run.weights"]:
        raise ConfigurationError("run.weights: 'theory' needs a random perturbation")
    if not all(isinstance(r, (int, float)) and r >= 0 for r in v["stats.ranges"]):
        raise ConfigurationError("stats.ranges: must be a list of non-negative numbers")


@dataclass(frozen=True)
class Scenario:
    """Validated flat configuration; read values with ``scenario["section.key"]``."""

    values: Mapping[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def name(self) -> str:
        return self.values["name"]

    def replace(self, **overrides) -> "Scenario":
        """Copy with overrides; keyword names use ``__`` for the dot."""
        flat = {k.replace("__", "."): val for k, val in overrides.items()}
        return scenario_from_dict({**self.values, **flat})

    def to_dict(self) -> dict[str, Any]:
        return dict(self.values)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def scenario_from_dict(table: Mapping) -> Scenario:
    flat = _flatten(table)
    unknown = sorted(set(flat) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
    values = dict(DEFAULTS)
    for key, value in flat.items():
        values[key] = _coerce(key, value)
    _validate(values)
    return Scenario(MappingProxyType(values))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return scenario_from_dict(table)


def preset_names() -> list[str]:
    root = resources.files("rwimaging") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> Scenario:
    if name not in preset_names():
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = (resources.files("rwimaging") / "presets" / f"{name}.toml").read_text()
    return scenario_from_dict(tomllib.loads(text))
