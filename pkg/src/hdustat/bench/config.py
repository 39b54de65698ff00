"""Flat ``key = value`` run configuration with typed validation.

Lines are ``key = value``; blank lines and lines starting with ``#`` are
ignored.  List values are comma separated.  The key table below is the
complete vocabulary (documented in ``docs/config.md``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from ..errors import ConfigError
from ..kernels import KernelFamily, MarginalFamily


def _float(raw: str) -> float:
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(raw: str) -> int:
    v = float(raw)
    if v != int(v):
        raise ValueError("must be an integer")
    return int(v)


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(_float(t) for t in raw.split(",") if t.strip())


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(_int(t) for t in raw.split(",") if t.strip())


def _choice(options):
    def parse(raw: str) -> str:
        v = raw.strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return parse


def _seed(raw: str) -> int:
    v = int(raw)
    if not 0 <= v < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _path(raw: str) -> str:
    return raw.strip()


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] | None = None
    requirement: str = ""


def _positive(v):
    return all(x > 0 for x in v) if isinstance(v, tuple) else v > 0


def _nonneg(v):
    return all(x >= 0 for x in v) if isinstance(v, tuple) else v >= 0


KEYS: dict[str, Key] = {
    "kernel": Key(_choice([f.value for f in KernelFamily]), "gmd"),
    "huber_xi": Key(_float, 1.0, _positive, "> 0"),
    "alpha": Key(_float, 0.05, lambda a: 0 < a < 1, "in (0, 1)"),
    "seed": Key(_seed, 0),
    # data files (relevant-test, changepoint)
    "data": Key(_path, None),
    "data_x": Key(_path, None),
    "data_y": Key(_path, None),
    # relevant test
    "delta": Key(_float, None, _nonneg, ">= 0"),
    "delta_ratio": Key(_float, 2.0, lambda r: r >= 1, ">= 1"),
    "lambda_grid": Key(_int, None, lambda m: m >= 8, ">= 8"),
    "w_paths": Key(_int, 100_000, lambda m: m >= 100, ">= 100"),
    "w_grid": Key(_int, 2048, lambda m: m >= 16, ">= 16"),
    # change point
    "n_paths": Key(_int, 20_000, lambda m: m >= 1000, ">= 1000"),
    "bridge_grid": Key(_int, None, lambda m: m >= 2, ">= 2"),
    # simulation designs
    "test": Key(_choice(["changepoint", "relevant"]), "changepoint"),
    "replications": Key(_int, 500, lambda r: r >= 1, ">= 1"),
    "dist": Key(_choice([f.value for f in MarginalFamily]), "normal"),
    "n": Key(_int, 400, lambda n: n >= 4, ">= 4"),
    "p": Key(_int, 4, lambda p: p >= 1, ">= 1"),
    "loc": Key(_floats, (0.0,)),
    "scale": Key(_floats, (1.0,), _nonneg, ">= 0"),
    "tau_star": Key(_float, 0.5, lambda t: 0 < t < 1, "in (0, 1)"),
    "shift": Key(_floats, (0.0,)),
    "scale_shift": Key(_floats, (0.0,)),
    "n_y": Key(_int, None, lambda n: n >= 4, ">= 4"),
    "loc_y": Key(_floats, None),
    "scale_y": Key(_floats, None, _nonneg, ">= 0"),
    # lemma1-check
    "ns": Key(_ints, (250, 500, 1000, 2000), lambda v: len(v) >= 2 and all(n >= 2 for n in v), "two or more sizes >= 2"),
    # quantile-table
    "alphas": Key(_floats, (0.10, 0.05, 0.01), lambda v: len(v) > 0 and all(0 < a < 1 for a in v), "in (0, 1)"),
    "sigma_diag": Key(_floats, None, _nonneg, ">= 0"),
    "sigma_file": Key(_path, None),
}

PATH_KEYS = ("data", "data_x", "data_y", "sigma_file")


class RunConfig:
    """Validated key/value configuration; unset keys read as their defaults."""

    def __init__(self, values: dict[str, Any], explicit: set[str] | None = None):
        self._values = values
        self._explicit = set(values) if explicit is None else explicit

    def __getattr__(self, name):
        try:
            values = self.__dict__["_values"]
        except KeyError:
            raise AttributeError(name) from None
        if name in values:
            return values[name]
        if name in KEYS:
            return KEYS[name].default
        raise AttributeError(name)

    def is_set(self, name: str) -> bool:
        return name in self._explicit

    def replace(self, **changes) -> "RunConfig":
        return RunConfig({**self._values, **changes}, self._explicit | set(changes))

    def echo(self) -> dict[str, Any]:
        """Every key with its effective value, in key order."""
        out = {}
        for name in sorted(KEYS):
            v = getattr(self, name)
            out[name] = list(v) if isinstance(v, tuple) else v
        return out

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"missing required config key(s): {', '.join(missing)}")


def _parse_pairs(pairs: list[tuple[str, str, str]]) -> dict[str, Any]:
    values = {}
    for key, raw, where in pairs:
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        spec = KEYS[key]
        try:
            v = spec.parse(raw)
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{where}: bad value {raw.strip()!r} for {key}: {err}") from None
        if spec.check is not None and not spec.check(v):
            raise ConfigError(f"{where}: {key} must be {spec.requirement}, got {raw.strip()!r}")
        values[key] = v
    return values


def read_pairs(path) -> list[tuple[str, str, str]]:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror or err}") from err
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        pairs.append((key.strip(), raw.strip(), f"{path}:{lineno}"))
    return pairs


def load_config(path=None, overrides: list[str] | None = None, seed: int | None = None) -> RunConfig:
    """Parse the config file (if any), apply ``key=value`` overrides and the seed flag.

    Relative data paths are resolved against the config file's directory and
    must exist.
    """
    pairs = read_pairs(path) if path is not None else []
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        pairs.append((key.strip(), raw.strip(), "--set"))
    values = _parse_pairs(pairs)
    if seed is not None:
        values["seed"] = _parse_pairs([("seed", str(seed), "--seed")])["seed"]
    base = Path(path).parent if path is not None else Path(".")
    for key in PATH_KEYS:
        if key in values:
            resolved = Path(values[key])
            if not resolved.is_absolute():
                resolved = base / resolved
            if not resolved.is_file():
                raise ConfigError(f"{key}: file not found: {resolved}")
            values[key] = str(resolved)
    return RunConfig(values)
