"""JSON interchange: forms, scalars, deterministic report output, schemas."""
from __future__ import annotations

import enum
import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .exterior import EXACT, FLOAT, Form


class InputError(ValueError):
    """Malformed or out-of-contract input (CLI exit code 2)."""


def scalar_to_json(c):
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, (bool, np.bool_)):
        return bool(c)
    if isinstance(c, (int, np.integer)):
        return int(c)
    return float(c)


def scalar_from_json(v, mode: str):
    if mode == EXACT:
        if isinstance(v, bool):
            raise InputError("booleans are not coefficients")
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, str):
            try:
                return Fraction(v)
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(f"bad rational {v!r}") from exc
        raise InputError(f"exact coefficients must be integers or 'p/q' strings, got {v!r}")
    if isinstance(v, str):
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad number {v!r}") from exc
    return float(v)


def form_to_json(w: Form) -> dict:
    """1-based indices, terms in lexicographic order."""
    return {
        "degree": w.degree,
        "mode": w.mode,
        "terms": [{"idx": [i + 1 for i in idx], "c": scalar_to_json(c)}
                  for idx, c in sorted(w.items())],
    }


def form_from_json(obj) -> Form:
    validate(obj, "form")
    mode = obj.get("mode", EXACT)
    k = obj["degree"]
    terms = {}
    for t in obj["terms"]:
        idx = t["idx"]
        if len(idx) != k:
            raise InputError(f"term {idx} does not have {k} indices")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise InputError(f"term {idx} is not strictly increasing")
        key = tuple(i - 1 for i in idx)
        if key in terms:
            raise InputError(f"term {idx} repeated")
        terms[key] = scalar_from_json(t["c"], mode)
    return Form(k, terms, mode)


def matrix_to_json(M):
    return [[scalar_to_json(x) for x in row] for row in np.asarray(M).tolist()]


def to_jsonable(obj):
    """Recursively convert report values (forms, matrices, fractions, enums)."""
    if isinstance(obj, Form):
        return form_to_json(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (Fraction, bool, np.bool_, int, np.integer, float, np.floating)):
        return scalar_to_json(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report) -> str:
    """Deterministic text: sorted keys, shortest round-trip float repr."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=True) + "\n"


def load_json(path) -> object:
    """Parse a JSON file; syntax errors become :class:`InputError` with position."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc


_SCHEMAS: dict = {}


def schema(name: str) -> dict:
    if name not in _SCHEMAS:
        text = resources.files("mastruct").joinpath("schemas", f"{name}.schema.json").read_text()
        _SCHEMAS[name] = json.loads(text)
    return _SCHEMAS[name]


def validate(obj, name: str):
    try:
        jsonschema.validate(obj, schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{name} schema violation at {where}: {exc.message}") from exc


__all__ = ["InputError", "form_to_json", "form_from_json", "dumps", "load_json", "validate",
           "to_jsonable", "matrix_to_json", "FLOAT", "EXACT"]
