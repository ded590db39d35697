"""Deterministic JSON reports: sorted keys, floats at 17 significant digits, complex as ``[re, im]``."""

from __future__ import annotations

import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def to_plain(obj):
    """Convert numpy, complex, Fraction and report objects to JSON-ready Python values."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, Enum):
        return to_plain(obj.value)
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating, Fraction)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    return s if ("." in s or "e" in s) else s + ".0"


def _emit(v, indent: int, level: int, out: list) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{")
        for i, k in enumerate(sorted(v)):
            out.append(("," if i else "") + pad + json.dumps(k) + ": ")
            _emit(v[k], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(v, list):
        if not v:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(v):
            out.append(("," if i else "") + pad)
            _emit(item, indent, level + 1, out)
        out.append(end + "]")
    elif isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        out.append(json.dumps(v))
    elif isinstance(v, float):
        out.append(_float(v))
    else:
        raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(to_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def write_report(path, command: str, body: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, **body}
    text = dumps(doc)
    Path(path).write_text(text, encoding="utf-8")
    return text
