"""Deterministic serialization helpers.

All floating-point output uses a fixed 17-significant-digit format (enough to
round-trip IEEE doubles) and no locale, so identical data always serializes
to identical bytes.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

__all__ = ["format_float", "dumps17", "to_plain"]


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_plain(obj: Any) -> Any:
    """Recursively convert numpy containers/scalars to plain Python types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _stringify_floats(obj: Any):
    """Swap finite floats for unique tokens (restored unquoted after dump).

    Non-finite floats become plain JSON strings ("inf", "-inf", "nan") since
    bare JSON has no representation for them.
    """
    table: dict[str, str] = {}

    def walk(o):
        if isinstance(o, bool):
            return o
        if isinstance(o, float):
            if not math.isfinite(o):
                return format_float(o)
            token = f"@@F{len(table)}@@"
            table[token] = format_float(o)
            return token
        if isinstance(o, dict):
            return {k: walk(v) for k, v in o.items()}
        if isinstance(o, list):
            return [walk(v) for v in o]
        return o

    return walk(obj), table


def dumps17(obj: Any) -> str:
    """json.dumps with sorted keys and 17-significant-digit floats."""
    plain = to_plain(obj)
    tagged, table = _stringify_floats(plain)
    text = json.dumps(tagged, sort_keys=True, indent=2)
    for token, value in table.items():
        text = text.replace(f'"{token}"', value)
    return text
