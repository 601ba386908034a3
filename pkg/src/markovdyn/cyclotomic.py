"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the group ring Q[x]/(x^N - 1); equality and zero
tests reduce modulo the cyclotomic polynomial Phi_N.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


def _poly_divmod(num: list, den: list) -> tuple[list, list]:
    num = list(num)
    q = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    while len(num) >= len(den) and any(num):
        shift = len(num) - len(den)
        coef = Fraction(num[-1]) / den[-1]
        q[shift] = coef
        for i, c in enumerate(den):
            num[shift + i] -= coef * c
        while num and num[-1] == 0:
            num.pop()
    return q, num


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Coefficients (lowest degree first) of Phi_n."""
    # x^n - 1 divided by Phi_d for proper divisors d of n
    p = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            p, r = _poly_divmod(p, list(cyclotomic_poly(d)))
            assert not any(r)
    while p and p[-1] == 0:
        p.pop()
    return tuple(int(c) for c in p)


class Cyclotomic:
    __slots__ = ("N", "c")

    def __init__(self, N: int, coeffs):
        self.N = N
        self.c = tuple(Fraction(v) for v in coeffs)

    @classmethod
    def zeta_power(cls, N: int, k: int) -> "Cyclotomic":
        c = [0] * N
        c[k % N] = 1
        return cls(N, c)

    @classmethod
    def const(cls, N: int, v) -> "Cyclotomic":
        c = [0] * N
        c[0] = Fraction(v)
        return cls(N, c)

    def _lift(self, o) -> "Cyclotomic":
        if isinstance(o, Cyclotomic):
            if o.N != self.N:
                raise ValueError("cyclotomic order mismatch")
            return o
        return Cyclotomic.const(self.N, o)

    def __add__(self, o):
        o = self._lift(o)
        return Cyclotomic(self.N, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.N, [-a for a in self.c])

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        N = self.N
        out = [Fraction(0)] * N
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        out[(i + j) % N] += a * b
        return Cyclotomic(N, out)

    __rmul__ = __mul__

    def reduced(self) -> tuple:
        _, r = _poly_divmod(list(self.c), [Fraction(v) for v in cyclotomic_poly(self.N)])
        while r and r[-1] == 0:
            r.pop()
        return tuple(r)

    def is_zero(self) -> bool:
        return not any(self.reduced())

    def __eq__(self, o):
        try:
            return (self - o).is_zero()
        except ValueError:
            return NotImplemented

    def __hash__(self):
        return hash((self.N, self.reduced()))

    def to_complex(self) -> complex:
        import cmath

        return sum(complex(a) * cmath.exp(2j * cmath.pi * k / self.N) for k, a in enumerate(self.c))

    def __repr__(self):
        return f"Cyclotomic({self.N}, {self.reduced()})"


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)
