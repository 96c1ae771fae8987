"""Exact score arithmetic shared by metrics and reports."""

import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

from ..core.errors import AppException, ErrorCode

Number = Union[int, float, Fraction, Decimal, str]


def to_fraction(value: Number) -> Fraction:
    """
    Exact rational for a score.

    Floats go through their shortest repr, so 93.33 becomes 9333/100 rather
    than the binary expansion of the float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise AppException(ErrorCode.VALIDATION_ERROR, message_en=f"score must be finite, got {value}")
        return Fraction(repr(value))
    if isinstance(value, Rational):
        return Fraction(value)
    return Fraction(str(value))


def round_half_up(value: Number) -> int:
    value = to_fraction(value)
    if value < 0:
        return -round_half_up(-value)
    return math.floor(value + Fraction(1, 2))


def unweighted_mean(scores: Iterable[Number]) -> Fraction:
    values = [to_fraction(s) for s in scores]
    if not values:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="Cannot average an empty score list")
    return sum(values, Fraction(0)) / len(values)


def format_score(value: Number, places: int = 2) -> str:
    """Half-up decimal rendering: format_score(Fraction(90195, 1000)) == "90.20"."""
    value = to_fraction(value)
    scale = 10 ** places
    scaled = round_half_up(value * scale)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def as_percentage(value: Number) -> Fraction:
    return to_fraction(value) * 100
