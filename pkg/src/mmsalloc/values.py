"""Exact rational values: parsing, formatting and small helpers."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable

from .errors import InputError

Value = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_value(raw) -> Fraction:
    """Parse ``"p/q"``, an integer string, or an int into a non-negative Fraction."""
    if isinstance(raw, bool):
        raise InputError(f"not a value: {raw!r}")
    if isinstance(raw, int):
        value = Fraction(raw)
    elif isinstance(raw, Fraction):
        value = raw
    elif isinstance(raw, str):
        text = raw.strip()
        num, sep, den = text.partition("/")
        try:
            if sep:
                value = Fraction(int(num), int(den))
            else:
                value = Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational value: {raw!r}") from exc
    else:
        raise InputError(f"not a value: {raw!r}")
    if value < 0:
        raise InputError(f"negative value: {raw!r}")
    return value


def as_value(raw) -> Fraction:
    """Coerce Python numbers (and strings) to a validated Fraction; floats are rejected."""
    if isinstance(raw, float):
        raise InputError("floats are not accepted; use Fraction or 'p/q' strings")
    return parse_value(raw)


def format_value(value: Fraction) -> str:
    """Render as an integer string when integral, else ``p/q``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def common_denominator(values: Iterable[Fraction]) -> int:
    return lcm(1, *(Fraction(v).denominator for v in values))
