"""JSON helpers: every number is serialized as a decimal string.

Arbitrary-precision integers routinely exceed 2**53, so emitting them as JSON
numbers would corrupt round-trips through double-precision parsers. All
emitters in this package go through `jsonable`, and all parsers accept the
string forms produced here.
"""

from __future__ import annotations

import json
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from typing import Any


def jsonable(value: Any) -> Any:
    """Recursively convert a value into JSON-safe data with stringified numbers."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        raise TypeError("floats are not serialized; use ints or Fractions")
    if isinstance(value, str):
        return value
    if is_dataclass(value) and not isinstance(value, type):
        return jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value: Any) -> str:
    """Deterministic single-line JSON (sorted keys, stringified numbers)."""
    return json.dumps(jsonable(value), sort_keys=True, separators=(",", ":"))


def parse_int(s: Any) -> int:
    """Parse a decimal-string integer produced by `jsonable`."""
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise ValueError(f"expected decimal string, got {s!r}")
    return int(s)
