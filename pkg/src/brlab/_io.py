"""Deterministic serialization and game-file loading.

All floating-point output is formatted with 17 significant digits, which
round-trips float64 exactly, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import numpy as np

__all__ = ["dump_json", "format_float", "game_hash", "load_game_file", "resolve_game_path"]


def format_float(x: float) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _serialize(obj) -> str:
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_serialize(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_serialize(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _serialize(obj.tolist())
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj, path=None) -> str:
    text = _serialize(obj) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def game_hash(a: np.ndarray, b: np.ndarray) -> str:
    payload = ";".join(format_float(x) for x in np.concatenate([a.ravel(), b.ravel()]))
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def resolve_game_path(spec: str):
    """A filesystem path, or the name of a bundled example (example1..4)."""
    import os

    if os.path.exists(spec):
        return spec
    name = spec if spec.endswith(".json") else spec + ".json"
    ref = resources.files("brlab").joinpath("games", name)
    if ref.is_file():
        return ref
    raise FileNotFoundError(f"game file {spec!r} not found")


def load_game_file(spec: str):
    """Read {"A": 3x3, "B": optional 3x3} and return the matrices."""
    ref = resolve_game_path(spec)
    with open(str(ref)) as fh:
        data = json.load(fh)
    if "A" not in data:
        raise ValueError(f"game file {spec!r} has no matrix 'A'")
    a = np.asarray(data["A"], dtype=float)
    b = np.asarray(data["B"], dtype=float) if "B" in data else None
    return a, b
