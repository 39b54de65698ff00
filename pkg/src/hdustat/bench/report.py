"""Report assembly and deterministic JSON serialisation."""
from __future__ import annotations

import json
import math
import os
from importlib import resources
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return v
    return obj


def make_report(command, cfg, results, diagnostics, seeds, wall_clock) -> dict:
    return _plain(
        {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": cfg.echo(),
            "results": results,
            "diagnostics": diagnostics,
            "seeds": seeds,
            "wall_clock_seconds": wall_clock,
        }
    )


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(dumps(report))
    os.replace(tmp, path)


def load_schema() -> dict:
    return json.loads(resources.files("hdustat").joinpath("report.schema.json").read_text())
