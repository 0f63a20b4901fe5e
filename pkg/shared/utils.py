"""Utility functions for delta-robin output and parsing."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import IO, Any

import numpy as np


def is_prime(value: int) -> bool:
    """Deterministic trial division; inputs here are small residue characteristics."""
    if value < 2:
        return False
    if value % 2 == 0:
        return value == 2
    return all(value % d for d in range(3, math.isqrt(value) + 1, 2))


def parse_fraction(value: Any) -> Fraction:
    """Coerce an int, float, Fraction or "num/den" string to a Fraction.

    Raises:
        ValueError: If the value cannot be read as a rational number.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rational numbers")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"not a finite number: {value}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise ValueError(f"not a rational number: {value!r}")


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as "num/den", or "num" when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_float(value: float, digits: int = 12) -> str:
    return f"{value:.{digits}g}"


def normalize_floats(payload: Any, digits: int = 12) -> Any:
    """Round every float in a nested payload to ``digits`` significant digits.

    A float rounded this way re-serialises to the same text after a JSON
    round trip, which keeps emitted payloads byte-stable.
    """
    if isinstance(payload, float):
        return float(format_float(payload, digits))
    if isinstance(payload, dict):
        return {key: normalize_floats(value, digits) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [normalize_floats(value, digits) for value in payload]
    return payload


def dumps_payload(payload: Any, digits: int = 12) -> str:
    """Serialise a payload as indented JSON with normalised floats and stable key order."""
    return json.dumps(normalize_floats(payload, digits), indent=2, ensure_ascii=False)


def write_csv(
    target: str | Path | IO[str],
    header: list[str],
    rows: list[list[Any]],
    digits: int = 12,
) -> None:
    """Write rows as CSV with a header line; floats use ``digits`` significant digits."""
    cells = [
        [format_float(v, digits) if isinstance(v, float) else str(v) for v in row] for row in rows
    ]
    table = np.array(cells, dtype=str).reshape(len(cells), len(header))
    np.savetxt(target, table, fmt="%s", delimiter=",", header=",".join(header), comments="")
