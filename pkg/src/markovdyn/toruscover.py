"""The D = 4 model: the two-to-one cover of the surface by the torus.

eta(u, v) = (u + 1/u, v + 1/v, uv + 1/(uv)) identifies the quotient of the
torus by (u, v) -> (1/u, 1/v) with the surface at D = 4, and a matrix
(a b; c d) acts by (u, v) -> (u^a v^b, u^c v^d). Everything here is
exactly solvable and serves as an oracle for the other modules.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable

import mpmath
import numpy as np

from .cyclotomic import Cyclotomic, lcm
from .errors import DegenerateMatrix, NotLoxodromic
from .mcg import Matrix2, classify
from .surface import SurfacePoint, apply, matrix_of


@dataclass(frozen=True)
class TorusPoint:
    """Either exact exponents (j/n, k/n) mod 1, i.e. (exp(2 pi i j/n), ...),
    or complex coordinates (u, v)."""

    u: object = None
    v: object = None
    exponents: tuple | None = None

    @classmethod
    def roots(cls, s, t) -> "TorusPoint":
        s, t = Fraction(s) % 1, Fraction(t) % 1
        return cls(exponents=(s, t))

    @classmethod
    def complex(cls, u, v) -> "TorusPoint":
        return cls(u=mpmath.mpmathify(u), v=mpmath.mpmathify(v))

    @property
    def is_exact(self) -> bool:
        return self.exponents is not None

    def numeric(self, prec: int = 128) -> tuple:
        if not self.is_exact:
            return self.u, self.v
        with mpmath.workprec(prec):
            return tuple(mpmath.expjpi(2 * mpmath.mpf(e.numerator) / e.denominator) for e in self.exponents)

    def serialize(self) -> str:
        if self.is_exact:
            return ",".join(f"{e.numerator}/{e.denominator}" for e in self.exponents)
        return f"{mpmath.nstr(self.u, 20)},{mpmath.nstr(self.v, 20)}"

    @classmethod
    def parse(cls, text: str) -> "TorusPoint":
        a, b = text.split(",")
        return cls.roots(Fraction(a), Fraction(b))


def _order(t: TorusPoint) -> int:
    s, r = t.exponents
    return max(lcm(s.denominator, r.denominator), 1)


def eta(t: TorusPoint, prec: int = 128, exact: bool = True) -> SurfacePoint:
    """Image on the D = 4 surface; exact cyclotomic coordinates for roots of unity."""
    if t.is_exact and exact:
        N = _order(t)
        s, r = t.exponents
        a, b = int(s * N), int(r * N)

        def two_cos(k):
            return Cyclotomic.zeta_power(N, k) + Cyclotomic.zeta_power(N, -k)

        return SurfacePoint(two_cos(a), two_cos(b), two_cos(a + b), 4, "cyclotomic", None)
    u, v = t.numeric(prec)
    with mpmath.workprec(prec):
        uv = u * v
        return SurfacePoint(u + 1 / u, v + 1 / v, uv + 1 / uv, mpmath.mpf(4), "complex", prec)


def deck(t: TorusPoint) -> TorusPoint:
    return monomial_apply(Matrix2(-1, 0, 0, -1), t)


def monomial_apply(m: Matrix2, t: TorusPoint) -> TorusPoint:
    if t.is_exact:
        s, r = t.exponents
        return TorusPoint.roots(m.a * s + m.b * r, m.c * s + m.d * r)
    u, v = t.u, t.v
    return TorusPoint(u=u ** m.a * v ** m.b, v=u ** m.c * v ** m.d)


def equivariance_check(w, t: TorusPoint, prec: int = 128):
    """Defect between eta(M t) and w(eta(t)); exact 0 for roots of unity."""
    m = matrix_of(w)
    if t.is_exact:
        lhs = eta(monomial_apply(m, t))
        rhs = apply(w, eta(t))
        diffs = [a - b for a, b in zip(lhs.coords(), rhs.coords())]
        if all(d.is_zero() for d in diffs):
            return Fraction(0)
        return max(abs(d.to_complex()) for d in diffs)
    with mpmath.workprec(prec):
        lhs = eta(monomial_apply(m, t), prec)
        rhs = apply(w, eta(t, prec))
        return max(abs(a - b) for a, b in zip(lhs.coords(), rhs.coords()))


# --- Smith normal form -------------------------------------------------

def smith_normal_form(A: Matrix2) -> tuple[Matrix2, tuple[int, int], Matrix2]:
    """Return (U, (s1, s2), V) with U A V = diag(s1, s2), U, V unimodular,
    s1 | s2 and s1 >= 0."""
    M = [[A.a, A.b], [A.c, A.d]]
    U = [[1, 0], [0, 1]]
    V = [[1, 0], [0, 1]]

    def row_op(i, j, q):  # row i -= q row j
        for k in range(2):
            M[i][k] -= q * M[j][k]
            U[i][k] -= q * U[j][k]

    def col_op(i, j, q):  # col i -= q col j
        for k in range(2):
            M[k][i] -= q * M[k][j]
            V[k][i] -= q * V[k][j]

    def swap_rows():
        M[0], M[1] = M[1], M[0]
        U[0], U[1] = U[1], U[0]

    def swap_cols():
        for R in (M, V):
            for row in R:
                row[0], row[1] = row[1], row[0]

    while True:
        entries = [(abs(M[i][j]), i, j) for i in range(2) for j in range(2) if M[i][j] != 0]
        if not entries:
            break
        _, i, j = min(entries)
        if i == 1:
            swap_rows()
        if j == 1:
            swap_cols()
        p = M[0][0]
        done = True
        if M[1][0] % p:
            row_op(1, 0, M[1][0] // p)
            done = False
        else:
            row_op(1, 0, M[1][0] // p)
        if M[0][1] % p:
            col_op(1, 0, M[0][1] // p)
            done = False
        else:
            col_op(1, 0, M[0][1] // p)
        if not done:
            continue
        # now M = diag(p, r); enforce divisibility
        r = M[1][1]
        if r % p:
            # add row 1 to row 0 and repeat
            row_op(0, 1, -1)
            continue
        break
    if M[0][0] < 0:
        for k in range(2):
            M[0][k] = -M[0][k]
            U[0][k] = -U[0][k]
    if M[1][1] < 0:
        for k in range(2):
            M[1][k] = -M[1][k]
            U[1][k] = -U[1][k]
    return Matrix2.from_rows(U), (M[0][0], M[1][1]), Matrix2.from_rows(V)


@dataclass(frozen=True)
class PeriodicSet:
    points: tuple  # TorusPoint, exact
    count: int
    quotient_count: int
    smith: tuple


def periodic_points_exact(m: Matrix2, n: int) -> PeriodicSet:
    """All k in (R/Z)^2 with (M^n - I) k = 0 mod 1, via the Smith normal form."""
    if n < 1:
        raise ValueError("period must be positive")
    A = m.power(n) - Matrix2.identity()
    if A.det == 0:
        raise DegenerateMatrix(f"det(M^{n} - I) = 0")
    U, (s1, s2), V = smith_normal_form(A)
    pts = []
    seen = set()
    for i in range(s1):
        for j in range(s2):
            m1, m2 = Fraction(i, s1), Fraction(j, s2)
            k = TorusPoint.roots(V.a * m1 + V.b * m2, V.c * m1 + V.d * m2)
            if k.exponents not in seen:
                seen.add(k.exponents)
                pts.append(k)
    pts.sort(key=lambda t: t.exponents)
    two_torsion = sum(1 for t in pts if all((2 * e) % 1 == 0 for e in t.exponents))
    return PeriodicSet(tuple(pts), len(pts), (len(pts) + two_torsion) // 2, (s1, s2))


def sigma_classes(points: Iterable[TorusPoint]) -> list[TorusPoint]:
    """One representative per orbit of the deck involution."""
    seen, reps = set(), []
    for t in points:
        key = t.exponents
        neg = deck(t).exponents
        if key in seen or neg in seen:
            continue
        seen.add(key)
        reps.append(t)
    return reps


def lebesgue_sample_array(seed: int, N: int) -> np.ndarray:
    """Rows (theta, phi, x, y, z) with theta, phi uniform on [0, 1)."""
    if N < 1:
        raise ValueError("N must be positive")
    rng = np.random.default_rng(seed)
    th = rng.random(N)
    ph = rng.random(N)
    x = 2 * np.cos(2 * np.pi * th)
    y = 2 * np.cos(2 * np.pi * ph)
    z = 2 * np.cos(2 * np.pi * (th + ph))
    return np.column_stack([th, ph, x, y, z])


def lebesgue_sample(seed: int, N: int) -> list[SurfacePoint]:
    arr = lebesgue_sample_array(seed, N)
    return [SurfacePoint(float(r[2]), float(r[3]), float(r[4]), 4.0, "float", 53) for r in arr]


@dataclass(frozen=True)
class EquidistributionReport:
    averages: dict  # character -> 0 or 1
    fraction_trivial: Fraction  # among nonzero characters
    count: int


def character_average(m: Matrix2, n: int, k: tuple[int, int]) -> int:
    """Exact average of exp(2 pi i <k, x>) over ker(M^n - I): 0 or 1."""
    A = m.power(n) - Matrix2.identity()
    if A.det == 0:
        raise DegenerateMatrix(f"det(M^{n} - I) = 0")
    U, (s1, s2), V = smith_normal_form(A)
    # points are V (i/s1, j/s2); <k, V m> = (V^T k) . m
    t1 = V.a * k[0] + V.c * k[1]
    t2 = V.b * k[0] + V.d * k[1]
    return 1 if t1 % s1 == 0 and t2 % s2 == 0 else 0


def equidistribution_test(m: Matrix2, n: int, characters) -> EquidistributionReport:
    avgs = {}
    for k in characters:
        k = (int(k[0]), int(k[1]))
        avgs[k] = character_average(m, n, k)
    nonzero = [k for k in avgs if k != (0, 0)]
    frac = Fraction(sum(avgs[k] for k in nonzero), len(nonzero)) if nonzero else Fraction(0)
    count = abs((m.power(n) - Matrix2.identity()).det)
    return EquidistributionReport(avgs, frac, count)


def box_characters(bound: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(-bound, bound + 1) for b in range(-bound, bound + 1)]


def perron_data(m: Matrix2, prec: int = 128):
    """Dominant eigenvalue, right eigenvector w and left eigenvector l with <w, l> = 1."""
    if classify(m) != "loxodromic":
        raise NotLoxodromic(f"{m} is not loxodromic")
    with mpmath.workprec(prec):
        t, dt = m.trace, m.det
        root = mpmath.sqrt(t * t - 4 * dt)
        lam = (t + root) / 2 if t > 0 else (t - root) / 2
        a, b, c, d = m.a, m.b, m.c, m.d
        if b != 0:
            w = (mpmath.mpf(b), lam - a)
        else:
            w = (lam - d, mpmath.mpf(c))
        if c != 0:
            l = (mpmath.mpf(c), lam - a)
        else:
            l = (lam - d, mpmath.mpf(b))
        s = w[0] * l[0] + w[1] * l[1]
        l = (l[0] / s, l[1] / s)
        return lam, w, l


def closed_form_green(m: Matrix2, t: TorusPoint, prec: int = 128):
    """|<(log|u|, log|v|), l>| * max(|w1|, |w2|, |w1 + w2|)."""
    lam, w, l = perron_data(m, prec)
    with mpmath.workprec(prec):
        if t.is_exact:
            return mpmath.mpf(0)
        L = (mpmath.log(abs(t.u)), mpmath.log(abs(t.v)))
        proj = abs(L[0] * l[0] + L[1] * l[1])
        return proj * max(abs(w[0]), abs(w[1]), abs(w[0] + w[1]))
