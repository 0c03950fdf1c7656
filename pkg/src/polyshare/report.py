"""Versioned JSON reports emitted by the command line."""

from __future__ import annotations

import math
import sys
from typing import Any, Iterable, Optional

import jsonschema
import numpy as np

from .poly import LinearMap, Polynomial
from .validation import Validation

__all__ = ["SCHEMA_VERSION", "REPORT_SCHEMA", "make_report", "validate_report", "jsonable"]

SCHEMA_VERSION = "1.0"

_VALIDATION = {
    "type": "object",
    "required": ["name", "passed", "residual"],
    "properties": {
        "name": {"type": "string"},
        "passed": {"type": "boolean"},
        "residual": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "polyshare report",
    "type": "object",
    "required": ["schema_version", "command", "inputs", "result", "validations", "diagnostics", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "inputs": {"type": "object"},
        "result": {"type": ["object", "null"]},
        "validations": {"type": "array", "items": _VALIDATION},
        "diagnostics": {"type": "object"},
        "timing": {"type": ["number", "null"], "minimum": 0},
    },
    "additionalProperties": False,
}


def jsonable(x: Any) -> Any:
    """Plain JSON data; non-finite floats become ``None``."""
    if isinstance(x, (Polynomial, LinearMap)):
        return x.to_json()
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, complex):
        return [jsonable(x.real), jsonable(x.imag)]
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _validation_row(v: Validation) -> dict:
    r = abs(float(v.residual))
    if not math.isfinite(r):
        r = sys.float_info.max
    return {"name": v.name, "passed": bool(v.passed), "residual": r}


def make_report(command: str, inputs: dict, result: Optional[dict], validations: Iterable[Validation] = (),
                diagnostics: Optional[dict] = None, timing: Optional[float] = None) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": jsonable(inputs),
        "result": jsonable(result),
        "validations": [_validation_row(v) for v in validations],
        "diagnostics": jsonable(diagnostics or {}),
        "timing": None if timing is None else round(float(timing), 3),
    }
    validate_report(report)
    return report


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)
