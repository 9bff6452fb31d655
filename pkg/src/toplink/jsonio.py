"""JSON conventions: every complex number is a two-element ``[re, im]`` array."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from numbers import Number

import numpy as np

from .algebra import QuadraticForm


class InputError(ValueError):
    """Malformed user input (bad JSON, wrong shapes)."""


def _clean(x: float):
    x = float(x) + 0.0  # folds -0.0 into 0.0
    if math.isfinite(x):
        return x
    return str(x)  # "inf" / "nan": JSON has no literal for them


def complex_pair(z) -> list:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def to_jsonable(obj, complex_keys: bool = False):
    """Recursively convert results to JSON-ready structures.

    Complex scalars and numpy complex arrays become ``[re, im]`` pairs;
    NamedTuples become objects keyed by field name.
    """
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, QuadraticForm):
        return to_jsonable(obj.matrix)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_pair(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Number):
        return _clean(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [to_jsonable(x) for x in obj] if obj.ndim > 1 else [complex_pair(z) for z in obj]
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


_NUM = r'-?[0-9][0-9.eE+-]*|"-?(?:inf|nan)"'
_PAIR = re.compile(rf"\[\s*({_NUM}),\s*({_NUM})\s*\]")
_PAIR_ROW = re.compile(rf"\[\s*(\[(?:{_NUM}), (?:{_NUM})\](?:,\s*\[(?:{_NUM}), (?:{_NUM})\])*)\s*\]")


def dumps(obj) -> str:
    """Indented JSON; ``[re, im]`` pairs, and lists made only of pairs, stay on one line."""
    text = _PAIR.sub(r"[\1, \2]", json.dumps(to_jsonable(obj), indent=2))
    return _PAIR_ROW.sub(lambda m: "[" + re.sub(r",\s+\[", ", [", m.group(1)) + "]", text)


def parse_complex(x, where: str = "value") -> complex:
    """``[re, im]`` pair or a plain real number."""
    if isinstance(x, bool):
        raise InputError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, Number):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, Number) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise InputError(f"{where}: expected a number or [re, im], got {x!r}")


def parse_matrix(data, where: str = "form") -> np.ndarray:
    """3x3 nested list of complex entries; ``{"J": ...}`` wrappers are accepted."""
    if isinstance(data, dict):
        for key in ("J", "form", "matrix"):
            if key in data:
                return parse_matrix(data[key], f"{where}.{key}")
        raise InputError(f"{where}: object needs a 'J' entry")
    if not (isinstance(data, list) and len(data) == 3 and all(isinstance(r, list) and len(r) == 3 for r in data)):
        raise InputError(f"{where}: expected a 3x3 nested array")
    return np.array([[parse_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)]
                     for i, row in enumerate(data)])


def parse_vector(data, where: str = "s0") -> np.ndarray:
    if isinstance(data, dict):
        if all(k in data for k in ("S1", "S2", "S3")):
            data = [data["S1"], data["S2"], data["S3"]]
        elif "S" in data:
            data = data["S"]
        else:
            raise InputError(f"{where}: object needs S1, S2, S3 entries")
    if not (isinstance(data, list) and len(data) == 3):
        raise InputError(f"{where}: expected three components")
    return np.array([parse_complex(v, f"{where}[{i}]") for i, v in enumerate(data)])


def loads(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
