"""Deterministic JSON emission with 17-significant-digit floats.

The stdlib encoder renders floats via repr, whose shortest-round-trip
output length varies by value; serialized payloads here pin every float
to '%.17g' so identical pipeline results always produce identical bytes,
and non-finite values map to null. Parsing back uses plain json.loads.
"""
from __future__ import annotations

import json
import math
from datetime import datetime
from typing import Any

import numpy as np


def _escape(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _emit(obj: Any, parts: list[str]) -> None:
    if isinstance(obj, np.generic):
        obj = obj.item()
    elif isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format(obj, ".17g") if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        parts.append(_escape(obj))
    elif isinstance(obj, datetime):
        from .ingest import format_timestamp

        parts.append(_escape(format_timestamp(obj)))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {type(k)}")
            parts.append(_escape(k))
            parts.append(":")
            _emit(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _emit(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)} to JSON")


def dumps(obj: Any) -> str:
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def dump_path(obj: Any, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def loads(text: str) -> Any:
    return json.loads(text)
