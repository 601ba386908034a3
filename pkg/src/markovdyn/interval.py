"""Rectangular complex intervals on top of mpmath.iv, and a Krawczyk test.

mpmath.iv rounds outward at the precision of its context; ``precision``
sets that precision for a block of code.
"""
from __future__ import annotations

from contextlib import contextmanager

import mpmath

iv = mpmath.iv


@contextmanager
def precision(bits: int):
    old = iv.prec
    iv.prec = max(bits, old)
    try:
        yield
    finally:
        iv.prec = old


def _real(v):
    if isinstance(v, CInterval):
        return v
    if isinstance(v, (int,)):
        return CInterval(iv.mpf(v), iv.mpf(0))
    if isinstance(v, (mpmath.mpc, complex)):
        return CInterval(iv.mpf(mpmath.mpf(v.real)), iv.mpf(mpmath.mpf(v.imag)))
    return CInterval(iv.mpf(v), iv.mpf(0))


class CInterval:
    """re + i im with re, im real intervals."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = re if isinstance(re, type(iv.mpf(0))) else iv.mpf(re)
        self.im = iv.mpf(0) if im is None else (im if isinstance(im, type(iv.mpf(0))) else iv.mpf(im))

    @classmethod
    def around(cls, c, r) -> "CInterval":
        """Square of half-width r about the complex number c."""
        c = mpmath.mpmathify(c)
        rr = iv.mpf([-mpmath.mpf(r), mpmath.mpf(r)])
        return cls(iv.mpf(mpmath.mpf(c.real)) + rr, iv.mpf(mpmath.mpf(c.imag)) + rr)

    @classmethod
    def point(cls, c) -> "CInterval":
        return _real(mpmath.mpmathify(c))

    def __add__(self, o):
        o = _real(o)
        return CInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CInterval(-self.re, -self.im)

    def __sub__(self, o):
        o = _real(o)
        return CInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return _real(o) - self

    def __mul__(self, o):
        o = _real(o)
        return CInterval(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def mid(self):
        return mpmath.mpc(mpmath.mpf(self.re.mid.a), mpmath.mpf(self.im.mid.a))

    def rad(self):
        return max(mpmath.mpf(self.re.delta.b), mpmath.mpf(self.im.delta.b)) / 2

    def mag(self):
        """Upper bound for |z| over the box."""
        s = abs(self.re) ** 2 + abs(self.im) ** 2
        return mpmath.mpf(iv.sqrt(s).b)

    def mig(self):
        """Lower bound for |z| over the box."""
        def m(x):
            lo, hi = mpmath.mpf(x.a), mpmath.mpf(x.b)
            if lo <= 0 <= hi:
                return iv.mpf(0)
            return iv.mpf(min(abs(lo), abs(hi)))

        s = m(self.re) ** 2 + m(self.im) ** 2
        return mpmath.mpf(iv.sqrt(s).a)

    def contains(self, c) -> bool:
        c = mpmath.mpmathify(c)
        re, im = mpmath.mpf(c.real), mpmath.mpf(c.imag)
        return self.re.a <= re <= self.re.b and self.im.a <= im <= self.im.b

    def strictly_inside(self, o: "CInterval") -> bool:
        return (o.re.a < self.re.a and self.re.b < o.re.b and o.im.a < self.im.a and self.im.b < o.im.b)

    def intersects(self, o: "CInterval") -> bool:
        return not (self.re.b < o.re.a or o.re.b < self.re.a or self.im.b < o.im.a or o.im.b < self.im.a)

    def hull(self, o: "CInterval") -> "CInterval":
        lo_r = min(mpmath.mpf(self.re.a), mpmath.mpf(o.re.a))
        hi_r = max(mpmath.mpf(self.re.b), mpmath.mpf(o.re.b))
        lo_i = min(mpmath.mpf(self.im.a), mpmath.mpf(o.im.a))
        hi_i = max(mpmath.mpf(self.im.b), mpmath.mpf(o.im.b))
        return CInterval(iv.mpf([lo_r, hi_r]), iv.mpf([lo_i, hi_i]))

    def inflate(self, factor) -> "CInterval":
        c, r = self.mid(), self.rad()
        return CInterval.around(c, r * factor)

    def width(self):
        return 2 * self.rad()

    def to_json(self) -> dict:
        return {
            "re": [mpmath.nstr(mpmath.mpf(self.re.a), 25), mpmath.nstr(mpmath.mpf(self.re.b), 25)],
            "im": [mpmath.nstr(mpmath.mpf(self.im.a), 25), mpmath.nstr(mpmath.mpf(self.im.b), 25)],
        }

    def __repr__(self):
        return f"CInterval({self.re}, {self.im})"


def krawczyk(G, JG, center, radius, Y=None):
    """Krawczyk test for a square system on the box center +- radius.

    G(vector) and JG(vector) evaluate the system and its Jacobian on lists of
    CIntervals. Returns True when K(B) lies in the interior of B, which
    proves that B holds exactly one zero of G.
    """
    n = len(center)
    B = [CInterval.around(c, radius) for c in center]
    C = [CInterval.point(c) for c in center]
    if Y is None:
        Jc = JG(C)
        Ym = mpmath.matrix([[Jc[i][j].mid() for j in range(n)] for i in range(n)])
        try:
            Y = Ym ** -1
        except ZeroDivisionError:
            return False
    Yi = [[CInterval.point(Y[i, j]) for j in range(n)] for i in range(n)]
    Gc = G(C)
    JB = JG(B)
    diff = [B[j] - C[j] for j in range(n)]
    for i in range(n):
        acc = C[i]
        for k in range(n):
            acc = acc - Yi[i][k] * Gc[k]
        for j in range(n):
            m = CInterval(iv.mpf(1 if i == j else 0))
            for k in range(n):
                m = m - Yi[i][k] * JB[k][j]
            acc = acc + m * diff[j]
        if not acc.strictly_inside(B[i]):
            return False
    return True
