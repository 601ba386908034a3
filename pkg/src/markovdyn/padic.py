"""Rationals with tracked p-adic valuation and finite relative precision.

An element is p**v * u with u a unit modulo p**prec. Additions whose
result cancels below the available precision turn into an inexact zero
O(p**A); callers decide whether that matters.
"""
from __future__ import annotations

from fractions import Fraction


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def rational_valuation(q: Fraction, p: int) -> float:
    if q == 0:
        return float("inf")
    return valuation(q.numerator, p) - valuation(q.denominator, p)


class PAdic:
    __slots__ = ("p", "v", "u", "prec")

    def __init__(self, p: int, v: int, u: int, prec: int):
        # u == 0 encodes an inexact zero known modulo p**v
        self.p, self.v, self.u, self.prec = p, v, u, prec

    @classmethod
    def from_rational(cls, q, p: int, prec: int = 64) -> "PAdic":
        q = Fraction(q)
        if q == 0:
            # exact zero: absolute precision effectively infinite
            return cls(p, 10 ** 9, 0, 0)
        vn = valuation(q.numerator, p)
        vd = valuation(q.denominator, p)
        num = q.numerator // p ** vn
        den = q.denominator // p ** vd
        mod = p ** prec
        return cls(p, vn - vd, num * pow(den, -1, mod) % mod, prec)

    @property
    def is_zero(self) -> bool:
        return self.u == 0

    @property
    def absprec(self) -> int:
        return self.v if self.u == 0 else self.v + self.prec

    def _coerce(self, other) -> "PAdic":
        if isinstance(other, PAdic):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        return PAdic.from_rational(other, self.p, max(self.prec, 1))

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_zero or o.is_zero:
            return PAdic(self.p, self.v + o.v, 0, 0)
        prec = min(self.prec, o.prec)
        return PAdic(self.p, self.v + o.v, self.u * o.u % self.p ** prec, prec)

    __rmul__ = __mul__

    def __neg__(self):
        if self.is_zero:
            return self
        return PAdic(self.p, self.v, (-self.u) % self.p ** self.prec, self.prec)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.p
        A = min(self.absprec, o.absprec)
        m = min(self.v, o.v)
        if A <= m:
            return PAdic(p, A, 0, 0)
        mod = p ** (A - m)
        s = 0
        for t in (self, o):
            if not t.is_zero:
                s += t.u * p ** (t.v - m)
        s %= mod
        if s == 0:
            return PAdic(p, A, 0, 0)
        k = valuation(s, p)
        return PAdic(p, m + k, s // p ** k, A - m - k)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def norm_log(self) -> float:
        """-v, i.e. log_p |self|_p; -inf style sentinel for inexact zeros is -absprec."""
        return -self.v

    def __repr__(self):
        if self.is_zero:
            return f"O({self.p}^{self.v})"
        return f"{self.p}^{self.v}*{self.u} (+O({self.p}^{self.v + self.prec}))"
