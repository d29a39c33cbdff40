"""Exact rational helpers.

All scalars in the package are :class:`fractions.Fraction`; this module only
adds strict parsing/formatting and the common-denominator helper used to turn
rational capacities into integers.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable

Rational = Fraction

_LITERAL = re.compile(r"\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*")


def rat_of_string(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a canonical fraction.

    Decimal and exponent literals are rejected on purpose.
    """
    if not isinstance(text, str):
        raise TypeError(f"fraction literal must be a string, got {type(text).__name__}")
    m = _LITERAL.fullmatch(text)
    if m is None:
        raise ValueError(f"malformed fraction literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def rat_to_string(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_rational(value) -> Fraction:
    """Coerce int/Fraction/str to Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return rat_of_string(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def common_denominator(values: Iterable[Fraction | int]) -> int:
    """Least common multiple of the denominators of ``values``."""
    values = list(values)
    if not values:
        raise ValueError("common_denominator of an empty list")
    return math.lcm(*(Fraction(v).denominator for v in values))
