"""Run configuration: TOML parsing and per-recipe schema validation.

A config has top-level ``experiment``, ``seed``, ``samples`` and
``output_path`` keys and a ``[scenario]`` table whose keys depend on the
recipe. Sweep grids may be written as a list or as an inline table
``{start = 10, stop = 40, step = 5}`` (inclusive of ``stop``).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


REQUIRED = object()
TOP_LEVEL = {"experiment", "seed", "samples", "output_path", "scenario"}

SCHEMES_2U = ["bi", "uni", "noma", "oma"]


def _num(key, v, lo=None, hi=None, integer=False, open_lo=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if integer and not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if not np.isfinite(v):
        raise ConfigError(key, "must be finite")
    if lo is not None and (v <= lo if open_lo else v < lo):
        raise ConfigError(key, f"must be {'>' if open_lo else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(key, f"must be <= {hi}, got {v}")
    return int(v) if integer else float(v)


def positive(key, v):
    return _num(key, v, 0.0, open_lo=True)


def nonneg(key, v):
    return _num(key, v, 0.0)


def fraction(key, v):
    v = _num(key, v, 0.0, open_lo=True)
    if not v < 1:
        raise ConfigError(key, f"must lie in (0, 1), got {v}")
    return v


def count(key, v):
    return _num(key, v, 1, integer=True)


def seed_value(key, v):
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2**64:
        raise ConfigError(key, "must be an integer in [0, 2^64)")
    return v


def grid(key, v):
    """List of numbers or {start, stop, step}; returned sorted, strictly increasing."""
    if isinstance(v, dict):
        extra = set(v) - {"start", "stop", "step"}
        if extra or len(v) != 3:
            raise ConfigError(key, "grid table needs exactly start, stop, step")
        start = _num(f"{key}.start", v["start"])
        stop = _num(f"{key}.stop", v["stop"])
        step = positive(f"{key}.step", v["step"])
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        if n < 0:
            raise ConfigError(key, "stop must be >= start")
        vals = [start + i * step for i in range(max(n, 0))]
    elif isinstance(v, list):
        vals = [_num(f"{key}[{i}]", x) for i, x in enumerate(v)]
    else:
        raise ConfigError(key, f"expected a list or {{start, stop, step}} table, got {v!r}")
    vals = sorted(vals)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(key, "grid values must be distinct")
    return vals


def positive_grid(key, v):
    vals = grid(key, v)
    if any(x <= 0 for x in vals):
        raise ConfigError(key, "grid values must be > 0")
    return vals


def choice(options):
    def check(key, v):
        if v not in options:
            raise ConfigError(key, f"must be one of {options}, got {v!r}")
        return v
    return check


def subset(options):
    def check(key, v):
        if not isinstance(v, list) or not v:
            raise ConfigError(key, f"expected a non-empty list drawn from {options}")
        for x in v:
            if x not in options:
                raise ConfigError(key, f"unknown entry {x!r}; allowed {options}")
        if len(set(v)) != len(v):
            raise ConfigError(key, "entries must be distinct")
        return list(v)
    return check


@dataclass
class RunConfig:
    experiment: str
    seed: int
    samples: int
    output_path: str
    scenario: dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        """Every consumed parameter, defaults included."""
        return {"experiment": self.experiment, "seed": self.seed, "samples": self.samples,
                **{f"scenario.{k}": v for k, v in self.scenario.items()}}


def validate(raw: dict, schemas: dict, default_samples: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a table")
    unknown = set(raw) - TOP_LEVEL
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    if "experiment" not in raw:
        raise ConfigError("experiment", "required key missing")
    exp = raw["experiment"]
    if exp not in schemas:
        raise ConfigError("experiment", f"unknown recipe {exp!r}; see list-recipes")
    seed = seed_value("seed", raw.get("seed", 0))
    samples = count("samples", raw.get("samples", default_samples[exp]))
    out = raw.get("output_path", exp)
    if not isinstance(out, str) or not out:
        raise ConfigError("output_path", "must be a non-empty string")
    scen = raw.get("scenario", {})
    if not isinstance(scen, dict):
        raise ConfigError("scenario", "must be a table")
    schema = schemas[exp]
    for k in scen:
        if k not in schema:
            raise ConfigError(f"scenario.{k}", f"unknown key for recipe {exp!r}")
    values = {}
    for k, (check, default) in schema.items():
        if k in scen:
            values[k] = check(f"scenario.{k}", scen[k])
        elif default is REQUIRED:
            raise ConfigError(f"scenario.{k}", "required key missing")
        else:
            values[k] = default
    return RunConfig(exp, seed, samples, out, values)


def load(path: str | Path, schemas: dict, default_samples: dict) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"{path}: invalid TOML ({exc})") from exc
    return validate(raw, schemas, default_samples)
