"""Exact arithmetic on the extended nonnegative reals ``[0, +inf]``.

Finite values are :class:`fractions.Fraction` instances kept in lowest terms;
infinity is a separate variant, so order and arithmetic laws hold exactly.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Union

__all__ = [
    "ExtReal",
    "INF",
    "ZERO",
    "ONE",
    "Ordering",
    "add",
    "scale",
    "cmp",
    "parse_extreal",
    "coerce",
]

Number = Union[int, Fraction, "ExtReal", str]

_INF_WORDS = {"inf", "+inf", "infinity", "oo", "∞"}


class Ordering(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1


class ExtReal:
    """A value in ``[0, +inf]``: a nonnegative rational or infinity.

    Instances are immutable and hashable.  ``a * b`` follows the measure
    theory convention ``inf * 0 == 0``.
    """

    __slots__ = ("_q",)

    def __init__(self, value: Number = 0):
        if isinstance(value, ExtReal):
            q = value._q
        elif isinstance(value, str):
            q = _parse_text(value)
        elif isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            q = Fraction(value)
            if q < 0:
                raise ValueError(f"negative value {value!r} is outside [0, inf]")
        else:
            raise TypeError(f"cannot build an ExtReal from {type(value).__name__}")
        object.__setattr__(self, "_q", q)

    @classmethod
    def _make(cls, q: Fraction | None) -> ExtReal:
        obj = object.__new__(cls)
        object.__setattr__(obj, "_q", q)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    def __reduce__(self):
        return (parse_extreal, (str(self),))

    @property
    def is_inf(self) -> bool:
        return self._q is None

    @property
    def fraction(self) -> Fraction:
        """The finite value; raises ``ValueError`` for infinity."""
        if self._q is None:
            raise ValueError("infinity has no finite value")
        return self._q

    def is_zero(self) -> bool:
        return self._q is not None and self._q == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    # arithmetic

    def __add__(self, other: Number) -> ExtReal:
        other = coerce(other)
        if self._q is None or other._q is None:
            return INF
        return ExtReal._make(self._q + other._q)

    __radd__ = __add__

    def __mul__(self, other: Number) -> ExtReal:
        other = coerce(other)
        a, b = self._q, other._q
        if a is None:
            return ZERO if b == 0 else INF
        if b is None:
            return ZERO if a == 0 else INF
        return ExtReal._make(a * b)

    __rmul__ = __mul__

    # order

    def __eq__(self, other):
        if isinstance(other, ExtReal):
            return self._q == other._q
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._q is not None and self._q == other
        return NotImplemented

    def __hash__(self):
        # agrees with hash(int) / hash(Fraction) for finite values
        return hash(self._q) if self._q is not None else hash("inf")

    def __lt__(self, other):
        other = coerce(other)
        if self._q is None:
            return False
        return other._q is None or self._q < other._q

    def __le__(self, other):
        other = coerce(other)
        if other._q is None:
            return True
        return self._q is not None and self._q <= other._q

    def __gt__(self, other):
        return coerce(other).__lt__(self)

    def __ge__(self, other):
        return coerce(other).__le__(self)

    def __str__(self):
        if self._q is None:
            return "inf"
        if self._q.denominator == 1:
            return str(self._q.numerator)
        return f"{self._q.numerator}/{self._q.denominator}"

    def __repr__(self):
        return f"ExtReal({str(self)!r})"


def _parse_text(text: str) -> Fraction | None:
    s = text.strip()
    if s.lower() in _INF_WORDS:
        return None
    if not s or s[0] in "+-" or "e" in s.lower():
        raise ValueError(f"not a nonnegative rational literal: {text!r}")
    try:
        q = Fraction(s)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None
    except ValueError:
        raise ValueError(f"not a nonnegative rational literal: {text!r}") from None
    return q


INF = ExtReal._make(None)
ZERO = ExtReal._make(Fraction(0))
ONE = ExtReal._make(Fraction(1))


def coerce(value: Number) -> ExtReal:
    if isinstance(value, ExtReal):
        return value
    return ExtReal(value)


def parse_extreal(text: str) -> ExtReal:
    """Parse ``"p/q"``, ``"p"``, a decimal such as ``"1.25"``, or ``"inf"``."""
    if not isinstance(text, str):
        raise TypeError(f"expected a string, got {type(text).__name__}")
    return ExtReal(text)


def add(a: Number, b: Number) -> ExtReal:
    return coerce(a) + coerce(b)


def scale(k: Number, a: Number) -> ExtReal:
    """Product with ``inf * 0 == 0 * inf == 0``."""
    return coerce(k) * coerce(a)


def cmp(a: Number, b: Number) -> Ordering:
    a, b = coerce(a), coerce(b)
    if a == b:
        return Ordering.EQ
    return Ordering.LT if a < b else Ordering.GT
