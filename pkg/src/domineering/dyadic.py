"""Exact dyadic rationals ``numerator / 2**exponent``.

Every number value of a finite game is dyadic, so game values, tiny
subscripts and thermograph breakpoints all use this type instead of floats.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering

_LITERAL = re.compile(r"\s*(-?)\s*(\d+)(?:\s*/\s*(\d+))?\s*$")


@total_ordering
class Dyadic:
    __slots__ = ("num", "exp")

    def __init__(self, num: int = 0, exp: int = 0):
        if exp < 0:
            num <<= -exp
            exp = 0
        while exp and not num & 1:
            num >>= 1
            exp -= 1
        if num == 0:
            exp = 0
        self.num = num
        self.exp = exp

    @classmethod
    def from_fraction(cls, q) -> "Dyadic":
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, d.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        m = _LITERAL.match(text)
        if not m:
            raise ValueError(f"malformed number {text!r}")
        sign, n, d = m.groups()
        q = Fraction(int(n), int(d) if d else 1)
        return cls.from_fraction(-q if sign else q)

    @property
    def denominator(self) -> int:
        return 1 << self.exp

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def is_integer(self) -> bool:
        return self.exp == 0

    def floor(self) -> int:
        return self.num >> self.exp

    def ceil(self) -> int:
        return -((-self.num) >> self.exp)

    def _align(self, other: "Dyadic"):
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        return Dyadic(other) - self

    def __neg__(self):
        return Dyadic(-self.num, self.exp)

    def __abs__(self):
        return Dyadic(abs(self.num), self.exp)

    def half(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1)

    def __mul__(self, k):
        if isinstance(k, Dyadic):
            return Dyadic(self.num * k.num, self.exp + k.exp)
        return Dyadic(self.num * k, self.exp)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.exp == 0 and self.num == other
        if isinstance(other, Dyadic):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, Fraction):
            return self.as_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, _ = self._align(other)
        return a < b

    def __hash__(self):
        return hash((self.num, self.exp))

    def __bool__(self):
        return self.num != 0

    def __repr__(self):
        return f"Dyadic({self})"

    def __str__(self):
        if self.exp == 0:
            return str(self.num)
        return f"{self.num}/{1 << self.exp}"


ZERO = Dyadic(0)
ONE = Dyadic(1)


def simplest_between(lo: Dyadic | None, hi: Dyadic | None) -> Dyadic:
    """Simplest dyadic strictly between ``lo`` and ``hi`` (``None`` = unbounded).

    Requires ``lo < hi`` when both are given.
    """
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    # integers first, smallest magnitude wins
    if (lo is None or lo < ZERO) and (hi is None or ZERO < hi):
        return ZERO
    if hi is None or (lo is not None and not lo < ZERO):
        n = lo.floor() + 1
        if hi is None or Dyadic(n) < hi:
            return Dyadic(n)
    else:
        n = hi.ceil() - 1
        if lo is None or lo < Dyadic(n):
            return Dyadic(n)
    # no integer fits: smallest denominator wins
    e = 1
    while True:
        # first multiple of 2**-e strictly above lo
        if lo.exp <= e:
            k = (lo.num << (e - lo.exp)) + 1
        else:
            k = (lo.num >> (lo.exp - e)) + 1
        cand = Dyadic(k, e)
        if cand < hi:
            return cand
        e += 1
