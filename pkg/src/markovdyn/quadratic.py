"""Exact arithmetic in real quadratic fields Q(sqrt(d)).

Elements are written a + b*sqrt(d) with rational a, b and a squarefree
integer d >= 2. Rationals are the elements with b == 0; they combine with
elements of any field.
"""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath


def squarefree_part(n: int) -> tuple[int, int]:
    """Return (s, d) with n == s*s*d and d squarefree, for n >= 1."""
    if n < 1:
        raise ValueError("expected a positive integer")
    s, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1
    d *= m
    return s, d


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"cannot use {type(v).__name__} as an exact rational")


class QuadraticNumber:
    """a + b*sqrt(d), exact. Immutable and hashable."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a, b = _frac(a), _frac(b)
        if d < 1:
            raise ValueError("only real quadratic fields are supported")
        if b != 0 and d > 1:
            s, d0 = squarefree_part(d)
            b *= s
            d = d0
        if b == 0 or d == 1:
            a, b, d = a + b, Fraction(0), 1
        self.a, self.b, self.d = a, b, d

    @classmethod
    def sqrt(cls, n: int) -> "QuadraticNumber":
        if n < 0:
            raise ValueError("negative radicand")
        if n == 0:
            return cls(0)
        r = math.isqrt(n)
        if r * r == n:
            return cls(r)
        return cls(0, 1, n)

    # coercion helpers
    def _lift(self, other) -> "QuadraticNumber":
        if isinstance(other, QuadraticNumber):
            if self.d != other.d and self.d > 1 and other.d > 1:
                raise ValueError(f"field mismatch: Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        return QuadraticNumber(_frac(other))

    def _field(self, other: "QuadraticNumber") -> int:
        return max(self.d, other.d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __add__(self, other):
        o = self._lift(other)
        return QuadraticNumber(self.a + o.a, self.b + o.b, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        d = self._field(o)
        return QuadraticNumber(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return QuadraticNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadraticNumber(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def sign(self) -> int:
        """Exact sign of the real number a + b*sqrt(d)."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = self.a * self.a, self.b * self.b * self.d
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b and (self.b == 0 or self.d == o.d)

    def __hash__(self):
        return hash((self.a, self.b, self.d if self.b else 1))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def to_mpf(self, prec: int = 256):
        with mpmath.workprec(prec):
            v = mpmath.mpf(self.a.numerator) / self.a.denominator
            if self.b:
                v += mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d)
            return +v

    def __float__(self):
        # enough bits to survive cancellation between a and b sqrt(d)
        bits = max(self.a.numerator.bit_length(), self.a.denominator.bit_length(),
                   self.b.numerator.bit_length(), self.b.denominator.bit_length())
        return float(self.to_mpf(80 + 2 * bits))

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticNumber({self.a})"
        return f"QuadraticNumber({self.a} + {self.b}*sqrt({self.d}))"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        sgn = "+" if self.b > 0 else "-"
        b = abs(self.b)
        bs = "" if b == 1 else f"{b}*"
        if self.a == 0:
            return f"{'-' if self.b < 0 else ''}{bs}sqrt({self.d})"
        return f"{self.a} {sgn} {bs}sqrt({self.d})"
