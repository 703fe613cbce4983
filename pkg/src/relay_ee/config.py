"""TOML experiment configuration.

Top-level keys are network parameters, named as the :class:`NetworkParams`
fields (powers also as ``*_dbm``, the band split also as ``rho``).  Tables:

``[power_model]``  PowerModel fields
``[mc]``           n_realizations, seed, window_radius, rs_window_radius, workers
``[cdf]``          t_db_min, t_db_max, points
``[surface]``      axis tables ``lambda_nc`` / ``lambda_c`` ({min, max, points, scale})
                   and an ``overrides`` table of parameters
``[threshold]``    ``eta`` axis, ``p_rs_dbm`` list, ``baseline``, ``overrides``
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .energy import PowerModel
from .montecarlo import McConfig
from .params import NetworkParams, params_from_mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TABLES = ("power_model", "mc", "cdf", "surface", "threshold")


@dataclass(frozen=True)
class Axis:
    """One sweep axis; ``scale`` is ``"linear"`` or ``"log"``."""

    name: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"axis {self.name}: points must be >= 2")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis {self.name}: unknown scale {self.scale!r}")
        if self.scale == "log" and not (self.min > 0 and self.max > 0):
            raise ValueError(f"axis {self.name}: log scale needs positive bounds")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(np.log10(self.min), np.log10(self.max), self.points)
        return np.linspace(self.min, self.max, self.points)


PARAM_AXES = {f.name for f in dataclasses.fields(NetworkParams)}
MODEL_AXES = {f.name for f in dataclasses.fields(PowerModel)}


@dataclass(frozen=True)
class SweepSpec:
    study: str
    axes: tuple[Axis, ...]
    out: str | None = None

    def __post_init__(self):
        for ax in self.axes:
            if ax.name not in PARAM_AXES | MODEL_AXES:
                raise ValueError(f"sweep axis {ax.name!r} is not a parameter or power-model field")


DEFAULT_RHO = 1

DEFAULTS: dict[str, Any] = {
    "power_model": {},
    "mc": {"n_realizations": 10_000, "seed": 7, "workers": 1},
    "cdf": {"t_db_min": -20.0, "t_db_max": 40.0, "points": 61},
    "surface": {
        "lambda_nc": {"min": 1e-6, "max": 1e-1, "points": 21, "scale": "log"},
        "lambda_c": {"min": 1e-5, "max": 1.0, "points": 21, "scale": "log"},
        "overrides": {},
    },
    "threshold": {
        "eta": {"min": 0.0, "max": 2.0, "points": 41, "scale": "linear"},
        "p_rs_dbm": [24.0, 33.0, 38.0],
        "baseline": "all",
        "overrides": {},
    },
}


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw: dict, sets: list[str]) -> dict:
    """Apply ``key=value`` overrides; dotted keys reach into tables (``mc.seed=3``)."""
    out = _merge(raw, {})
    for item in sets:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ValueError(f"override {key!r} does not address a table")
        node[parts[-1]] = _parse_value(text.strip())
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment configuration."""

    raw: dict = field(repr=False)
    params: NetworkParams
    power_model: PowerModel
    mc: McConfig

    def study(self, name: str) -> dict:
        return self.raw[name]

    def study_params(self, name: str) -> NetworkParams:
        over = self.raw[name].get("overrides", {})
        return params_from_mapping(over, base=self.params) if over else self.params

    def axis(self, study: str, name: str) -> Axis:
        spec = self.raw[study][name]
        return Axis(name, float(spec["min"]), float(spec["max"]), int(spec["points"]), spec.get("scale", "linear"))

    def header_lines(self) -> list[str]:
        """Resolved configuration as sorted JSON, one table per line; worker count excluded."""
        flat = dict(self.raw)
        flat["mc"] = {k: v for k, v in flat["mc"].items() if k != "workers"}
        flat["power_model"] = dataclasses.asdict(self.power_model)
        lines = [f"params = {json.dumps(_jsonable(self.params.as_dict()), sort_keys=True)}"]
        for key in sorted(flat):
            if isinstance(flat[key], dict):
                lines.append(f"{key} = {json.dumps(_jsonable(flat[key]), sort_keys=True)}")
        return lines


def _jsonable(d):
    if isinstance(d, dict):
        return {k: _jsonable(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_jsonable(v) for v in d]
    if isinstance(d, (int, float, str, bool)) or d is None:
        return d
    return str(d)


def resolve(raw: dict) -> ExperimentConfig:
    raw = _merge(DEFAULTS, raw)
    param_keys = {k: v for k, v in raw.items() if k not in TABLES}
    if not {"rho", "m_b1", "m_b2"} & param_keys.keys():
        param_keys["rho"] = DEFAULT_RHO
    params = params_from_mapping(param_keys)
    model = PowerModel(**raw["power_model"])
    mc = McConfig(**raw["mc"])
    return ExperimentConfig(raw=raw, params=params, power_model=model, mc=mc)


def load_config(path=None, sets: list[str] | None = None) -> ExperimentConfig:
    """Read a TOML file (or only defaults when ``path`` is None) and apply overrides."""
    raw: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    return resolve(apply_overrides(raw, sets or []))
