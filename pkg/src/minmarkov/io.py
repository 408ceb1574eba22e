"""File formats: problem/model specs (JSON in), result files (JSON out) and
series (CSV with header ``t,x``).

Floats are written with 17 significant digits so files round-trip exactly
and are byte-stable across platforms.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .exceptions import InputError
from .mininfo import (
    MinInfoResult,
    binomial_marginal,
    check_marginal,
    inar1_dependence,
    inar2_dependence,
)
from .sampling import TimeSeries
from .statespace import StateSpace

RESULT_FORMAT = "minmarkov-result"

_number = {"type": "number"}


def _tagged(variants: dict) -> dict:
    """Schema for objects discriminated by their ``type`` field, so that
    validation errors point at the field of the selected variant."""
    return {
        "type": "object",
        "required": ["type"],
        "properties": {"type": {"enum": list(variants)}},
        "allOf": [
            {
                "if": {"properties": {"type": {"const": tag}}},
                "then": {
                    "properties": dict(props, type={"const": tag}),
                    "required": ["type", *props],
                    "additionalProperties": False,
                },
            }
            for tag, props in variants.items()
        ],
    }


_table_spec = _tagged(
    {
        "table": {"values": {"type": "array"}},
        "inar1": {"alpha": _number},
        "inar2": {"alpha": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}},
    }
)
_space = {
    "states": {"type": "array", "items": {"type": ["string", "integer"]}, "minItems": 2},
    "N": {"type": "integer", "minimum": 1},
    "order": {"type": "integer", "minimum": 1},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
}

PROBLEM_SCHEMA = {
    "type": "object",
    "properties": dict(
        _space,
        H=_table_spec,
        marginal=_tagged(
            {
                "table": {"values": {"type": "array", "items": _number, "minItems": 2}},
                "binomial": {
                    "N": {"type": "integer", "minimum": 1},
                    "nu": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                },
            }
        ),
    ),
    "required": ["H", "marginal"],
    "additionalProperties": False,
}

MODEL_SCHEMA = {
    "type": "object",
    "properties": dict(
        _space,
        h0=_table_spec,
        basis={"type": "array", "items": _table_spec},
        smoothing={"type": "number", "minimum": 0},
    ),
    "required": ["basis"],
    "additionalProperties": False,
}


# -- JSON writing ---------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x) + 0.0  # no negative zeros
        if not math.isfinite(x):
            raise InputError(f"cannot serialize non-finite number {x}")
        s = format(x, ".17g")
        if "." not in s and "e" not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats.  Arrays of scalars stay on
    one line; nested containers are indented."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _fmt(obj)


def write_json(obj, path) -> None:
    text = dumps(obj) + "\n"
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# -- specs ----------------------------------------------------------------------

def _validate(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        best = jsonschema.exceptions.best_match([exc])
        path = [str(p) for p in best.absolute_path]
        if best.validator == "required" and isinstance(best.instance, dict):
            path += [k for k in best.validator_value if k not in best.instance][:1]
        field = ".".join(path) or "<root>"
        err = InputError(f"invalid {what}: field '{field}': {best.message}")
        err.field = field
        raise err from None


def state_space_from(doc, fallback_m: int | None = None) -> StateSpace:
    if "states" in doc:
        space = StateSpace(tuple(doc["states"]))
        if "N" in doc and doc["N"] + 1 != space.m:
            err = InputError("field 'N': inconsistent with 'states'")
            err.field = "N"
            raise err
        return space
    if "N" in doc:
        return StateSpace.integers(doc["N"])
    if fallback_m is not None:
        return StateSpace.integers(fallback_m - 1)
    err = InputError("field 'N': either 'N' or 'states' is required")
    err.field = "N"
    raise err


def _field_error(field, message):
    err = InputError(f"field '{field}': {message}")
    err.field = field
    return err


def table_from(spec: dict, base: StateSpace, order: int, field: str) -> np.ndarray:
    m = base.m
    kind = spec["type"]
    if kind == "table":
        try:
            H = np.asarray(spec["values"], dtype=float)
        except (TypeError, ValueError):
            raise _field_error(f"{field}.values", "must be a rectangular numeric array") from None
        if H.shape != (m,) * (order + 1):
            raise _field_error(f"{field}.values", f"shape {H.shape} != {(m,) * (order + 1)}")
        if not np.all(np.isfinite(H)):
            raise _field_error(f"{field}.values", "must be finite")
        return H
    if kind == "inar1":
        if order != 1:
            raise _field_error(f"{field}.type", "inar1 needs order 1")
        return inar1_dependence(m - 1, spec["alpha"])
    if kind == "inar2":
        if order != 2:
            raise _field_error(f"{field}.type", "inar2 needs order 2")
        return inar2_dependence(m - 1, spec["alpha"])
    raise _field_error(f"{field}.type", f"unknown type {kind!r}")


def load_problem(doc: dict):
    """Validate a problem spec and return ``(base, order, H, r, options)``."""
    _validate(doc, PROBLEM_SCHEMA, "problem spec")
    marg = doc["marginal"]
    fallback = marg["N"] + 1 if marg["type"] == "binomial" else len(marg["values"])
    base = state_space_from(doc, fallback)
    order = int(doc.get("order", 1))
    if marg["type"] == "binomial":
        if marg["N"] + 1 != base.m:
            raise _field_error("marginal.N", f"binomial support {marg['N'] + 1} != {base.m} states")
        r = binomial_marginal(marg["N"], marg["nu"])
    else:
        r = np.asarray(marg["values"], dtype=float)
        if r.shape[0] != base.m:
            raise _field_error("marginal.values", f"{r.shape[0]} entries for {base.m} states")
        if np.any(r <= 0):
            raise _field_error("marginal.values", "probabilities must be positive")
        if abs(r.sum() - 1) > 1e-12:
            raise _field_error("marginal.values", f"probabilities sum to {r.sum()!r}, not 1")
    r = check_marginal(r, base.m)
    H = table_from(doc["H"], base, order, "H")
    opts = {k: doc[k] for k in ("tol", "max_iter", "seed") if k in doc}
    return base, order, H, r, opts


def load_model(doc: dict):
    """Validate a model spec; returns ``(base, order, h0, basis, options)``."""
    _validate(doc, MODEL_SCHEMA, "model spec")
    base = state_space_from(doc)
    order = int(doc.get("order", 1))
    h0 = table_from(doc["h0"], base, order, "h0") if "h0" in doc else None
    basis = [table_from(b, base, order, f"basis.{k}") for k, b in enumerate(doc["basis"])]
    opts = {k: doc[k] for k in ("tol", "max_iter", "smoothing") if k in doc}
    return base, order, h0, basis, opts


# -- result files -----------------------------------------------------------------

def result_to_dict(res: MinInfoResult, extra: dict | None = None) -> dict:
    out = {
        "format": RESULT_FORMAT,
        "version": __version__,
        "states": list(res.base.labels),
        "order": res.order,
        "H": res.H,
        "r": res.r,
        "kernel": res.kernel,
        "kappa": res.kappa,
        "delta": res.delta,
        "theta": res.theta,
        "psi": res.psi,
        "stationary_d": res.stationary_d,
        "stationary_1": res.stationary_1,
        "optimizer": res.diagnostics,
    }
    if extra:
        out.update(extra)
    return out


def result_from_dict(doc: dict) -> MinInfoResult:
    if not isinstance(doc, dict) or doc.get("format") != RESULT_FORMAT:
        raise InputError("not a result file (missing format marker)")
    try:
        base = StateSpace(tuple(doc["states"]))
        d = int(doc["order"])
        m = base.m
        arr = lambda key, shape: np.asarray(doc[key], dtype=float).reshape(shape)
        return MinInfoResult(
            base=base,
            order=d,
            H=arr("H", (m,) * (d + 1)),
            r=arr("r", (m,)),
            kernel=arr("kernel", (m,) * (d + 1)),
            kappa=arr("kappa", (m,) * d),
            delta=arr("delta", (m,)),
            stationary_d=arr("stationary_d", (m,) * d),
            theta=np.asarray(doc["theta"], dtype=float),
            psi=float(doc["psi"]),
            diagnostics=dict(doc.get("optimizer", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"corrupt result file: {exc}") from None


def read_result(path) -> tuple[MinInfoResult, dict]:
    doc = read_json(path)
    return result_from_dict(doc), doc


# -- series CSV ---------------------------------------------------------------------

def write_series(ts: TimeSeries, path) -> None:
    labels = ts.base.labels
    lines = ["t,x"] + [f"{t},{labels[x]}" for t, x in enumerate(ts.values.tolist(), start=1)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_series_column(path) -> list[str]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or [c.strip() for c in rows[0]] != ["t", "x"]:
        raise InputError(f"{path}: expected header 't,x'")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise InputError(f"{path}: line {i} must have 2 fields")
        out.append(row[1].strip())
    return out


def read_series(path, base: StateSpace) -> TimeSeries:
    codes = [base.index(lbl) for lbl in read_series_column(path)]
    return TimeSeries(base, np.asarray(codes, dtype=np.int64))
