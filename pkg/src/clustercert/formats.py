"""JSON and CSV file formats."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ClusterCertError
from .geometry import Cube, GridFunction, GridSpec


def _plain(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON; floats use the shortest repr that round-trips."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def grid_function_to_dict(u: GridFunction) -> dict:
    return {
        "dim": u.dim,
        "center": list(u.cube.center),
        "side": u.cube.side,
        "m": u.m,
        "values": u.values.tolist(),
    }


def grid_function_from_dict(data: dict) -> GridFunction:
    try:
        dim = int(data["dim"])
        center = [float(x) for x in data["center"]]
        cube = Cube(tuple(center), float(data["side"]))
        m = int(data["m"])
        values = data["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ClusterCertError(f"malformed grid function file: {exc}") from exc
    if cube.dim != dim:
        raise ClusterCertError(f"center has {cube.dim} coordinates but dim={dim}")
    return GridFunction(GridSpec(cube, m), np.asarray(values, dtype=np.float64))


def write_grid_function(u: GridFunction, path) -> None:
    Path(path).write_text(json.dumps(grid_function_to_dict(u)) + "\n")


def read_grid_function(path) -> GridFunction:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ClusterCertError(f"{path}: not valid JSON ({exc})") from exc
    return grid_function_from_dict(data)
