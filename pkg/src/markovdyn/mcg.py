"""Words in the three Vieta involutions and their images in GL2(Z).

A word [l1, ..., lk] stands for the composition l1 o ... o lk, so the
rightmost letter acts first. Matrices multiply in the same order, which
makes ``word_to_matrix`` a homomorphism into PGL2(Z).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .errors import NotLoxodromic
from .quadratic import QuadraticNumber

LETTERS = ("x", "y", "z")


@dataclass(frozen=True)
class Matrix2:
    """Integer 2x2 matrix (a b; c d)."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_rows(cls, rows) -> "Matrix2":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def __matmul__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __neg__(self) -> "Matrix2":
        return Matrix2(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def inverse(self) -> "Matrix2":
        dt = self.det
        if dt not in (1, -1):
            raise ValueError("matrix is not unimodular")
        return Matrix2(self.d * dt, -self.b * dt, -self.c * dt, self.a * dt)

    def transpose(self) -> "Matrix2":
        return Matrix2(self.a, self.c, self.b, self.d)

    def power(self, k: int) -> "Matrix2":
        if k < 0:
            return self.inverse().power(-k)
        result, base = Matrix2.identity(), self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def apply(self, p: int, q: int) -> tuple[int, int]:
        return self.a * p + self.b * q, self.c * p + self.d * q

    def eq_pgl(self, o: "Matrix2") -> bool:
        """Equality up to a global sign."""
        return self == o or self == -o

    def is_identity_mod2(self) -> bool:
        return (self.a - 1) % 2 == 0 and self.b % 2 == 0 and self.c % 2 == 0 and (self.d - 1) % 2 == 0

    def __str__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


GENERATOR_MATRICES = {
    "x": Matrix2(-1, -2, 0, 1),
    "y": Matrix2(1, 0, -2, -1),
    "z": Matrix2(1, 0, 0, -1),
}


def _normalize_letter(ch: str) -> str:
    c = ch.lower()
    if c not in LETTERS:
        raise ValueError(f"unknown generator letter {ch!r}")
    return c


def _cancel(letters: Iterable[str]) -> tuple[str, ...]:
    out: list[str] = []
    for ch in letters:
        c = _normalize_letter(ch)
        if out and out[-1] == c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class AutomorphismWord:
    """Reduced word in the Vieta involutions; the rightmost letter acts first."""

    letters: tuple[str, ...] = ()

    def __post_init__(self):
        if _cancel(self.letters) != tuple(self.letters):
            raise ValueError("word is not reduced; build it with reduce()")

    @classmethod
    def parse(cls, text: str) -> "AutomorphismWord":
        s = text.strip()
        if s.lower() in ("", "id", "1", "e"):
            return cls(())
        return reduce(list(s))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "AutomorphismWord") -> "AutomorphismWord":
        return reduce(self.letters + other.letters)

    def inverse(self) -> "AutomorphismWord":
        return AutomorphismWord(tuple(reversed(self.letters)))

    def power(self, k: int) -> "AutomorphismWord":
        base = self if k >= 0 else self.inverse()
        return reduce(base.letters * abs(k))

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self):
        return "".join(self.letters) or "id"


def reduce(letters: Sequence[str]) -> AutomorphismWord:
    """Cancel adjacent equal letters until the word is reduced."""
    return AutomorphismWord(_cancel(letters))


def word_to_matrix(w: AutomorphismWord) -> Matrix2:
    m = Matrix2.identity()
    for ch in w.letters:
        m = m @ GENERATOR_MATRICES[ch]
    return m


def _as_matrix(w) -> Matrix2:
    if isinstance(w, Matrix2):
        return w
    return word_to_matrix(w)


def classify(w) -> str:
    """'elliptic', 'parabolic' or 'loxodromic' from the spectral radius."""
    m = _as_matrix(w)
    t, dt = m.trace, m.det
    if dt == 1:
        if abs(t) > 2:
            return "loxodromic"
        if abs(t) == 2:
            return "elliptic" if m.eq_pgl(Matrix2.identity()) else "parabolic"
        return "elliptic"
    # det -1: eigenvalues are real with product -1
    return "loxodromic" if t != 0 else "elliptic"


@dataclass(frozen=True)
class DynamicalDegree:
    lambda1: QuadraticNumber
    trace: int
    det: int

    @property
    def value(self) -> float:
        return float(self.lambda1)

    def mp(self, prec: int = 256):
        return self.lambda1.to_mpf(prec)

    @property
    def entropy(self) -> float:
        return float(mpmath.log(self.lambda1.to_mpf(128)))

    def datum(self) -> str:
        """Exact form (t + sqrt(t^2 - 4 det))/2, written with |t|."""
        return f"({abs(self.trace)} + sqrt({self.trace ** 2 - 4 * self.det}))/2"


def spectral_radius(m: Matrix2) -> QuadraticNumber:
    t, dt = m.trace, m.det
    disc = t * t - 4 * dt
    if disc < 0:
        return QuadraticNumber(1)
    r = (QuadraticNumber(abs(t)) + QuadraticNumber.sqrt(disc)) / 2
    return r if r > 1 else QuadraticNumber(1)


def dynamical_degree(w) -> DynamicalDegree:
    m = _as_matrix(w)
    return DynamicalDegree(spectral_radius(m), m.trace, m.det)


@dataclass(frozen=True)
class BoundaryFixedPoints:
    alpha: QuadraticNumber  # repelling
    omega: QuadraticNumber  # attracting

    def as_set(self) -> frozenset:
        return frozenset((self.alpha, self.omega))


def mobius_derivative_modulus(m: Matrix2, t: QuadraticNumber) -> QuadraticNumber:
    """|d/dt (a t + b)/(c t + d)| = 1/(c t + d)^2 for |det| = 1."""
    den = t * m.c + m.d
    return abs(QuadraticNumber(1) / (den * den))


def boundary_fixed_points(w) -> BoundaryFixedPoints:
    m = _as_matrix(w)
    if classify(m) != "loxodromic":
        raise NotLoxodromic(f"{w} is {classify(m)}")
    disc = m.trace ** 2 - 4 * m.det
    root = QuadraticNumber.sqrt(disc)
    r1 = (QuadraticNumber(m.a - m.d) + root) / (2 * m.c)
    r2 = (QuadraticNumber(m.a - m.d) - root) / (2 * m.c)
    if mobius_derivative_modulus(m, r1) < 1:
        return BoundaryFixedPoints(alpha=r2, omega=r1)
    return BoundaryFixedPoints(alpha=r1, omega=r2)


@dataclass(frozen=True)
class CommonIterate:
    found: bool
    N: int | None
    M: int | None
    same_fixed_points: bool

    def __str__(self):
        return f"yes({self.N},{self.M})" if self.found else "no_within_bound"


def shares_common_iterate(f, g, bound: int) -> CommonIterate:
    """Search f^N = g^M in PGL2(Z) with 0 < M <= bound and 0 < |N| <= bound."""
    mf, mg = _as_matrix(f), _as_matrix(g)
    for m in (mf, mg):
        if classify(m) != "loxodromic":
            raise NotLoxodromic("both maps must be loxodromic")
    same = boundary_fixed_points(mf).as_set() == boundary_fixed_points(mg).as_set()
    fpow = {n: mf.power(n) for n in range(-bound, bound + 1) if n}
    for M in range(1, bound + 1):
        gm = mg.power(M)
        for n in range(1, bound + 1):
            for N in (-n, n):
                if fpow[N].eq_pgl(gm):
                    return CommonIterate(True, N, M, same)
    return CommonIterate(False, None, None, same)


# Elementary factorization of GL2(Z), used to act with arbitrary matrices
# (monomial maps) on the surface.
ELEMENTARY_MATRICES = {
    "S": Matrix2(0, 1, 1, 0),
    "T": Matrix2(1, 1, 0, 1),
    "U": Matrix2(1, -1, 0, 1),
    "z": Matrix2(1, 0, 0, -1),
    "N": Matrix2(-1, 0, 0, -1),
}


def _positive_factors(m: Matrix2) -> list[str] | None:
    """Factor a matrix with entries of one sign into T and L = S T S.

    Such factorizations only add exponents of equal sign, which keeps the
    surface evaluation free of cancellation along expanding orbits.
    """
    prefix: list[str] = []
    if max(m.a, m.b, m.c, m.d) <= 0:
        m = -m
        prefix.append("N")
    if min(m.a, m.b, m.c, m.d) < 0:
        return None
    suffix: list[str] = []
    if m.det == -1:
        m = m @ ELEMENTARY_MATRICES["S"]
        suffix.append("S")
    out: list[str] = []
    a, b, c, d = m.a, m.b, m.c, m.d
    while (a, b, c, d) != (1, 0, 0, 1):
        if a >= c and b >= d:
            a, b = a - c, b - d
            out.append("T")
        elif c >= a and d >= b:
            c, d = c - a, d - b
            out += ["S", "T", "S"]
        else:
            return None
        if min(a, b, c, d) < 0:
            return None
    return prefix + out + suffix


def elementary_factors(m: Matrix2) -> list[str]:
    """Tags t1..tk with m == E[t1] @ ... @ E[tk] over the elementary matrices."""
    if m.det not in (1, -1):
        raise ValueError("matrix is not unimodular")
    pos = _positive_factors(m)
    if pos is not None:
        return pos
    prefix: list[str] = []
    r = m
    while r.c != 0:
        q = r.a // r.c
        # r = T^q S r' with r' = S T^{-q} r
        prefix += ["T"] * q if q > 0 else ["U"] * (-q)
        r = Matrix2(r.a - q * r.c, r.b - q * r.d, r.c, r.d)
        r = Matrix2(r.c, r.d, r.a, r.b)
        prefix.append("S")
    a, d = r.a, r.d
    diag = {(1, 1): [], (-1, -1): ["N"], (1, -1): ["z"], (-1, 1): ["N", "z"]}[(a, d)]
    k = r.b * a
    tail = ["T"] * k if k > 0 else ["U"] * (-k)
    return prefix + diag + tail


def _arc_letter(m: Matrix2) -> str | None:
    """Letter whose reflection edge of the base ideal triangle (0, -1, oo)
    separates the triangle from its image under m."""
    verts = [m.apply(0, 1), m.apply(-1, 1), m.apply(1, 0)]
    vals = [None if q == 0 else Fraction(p, q) for p, q in verts]  # None = oo
    arcs = {
        "x": lambda t: t is None or t <= -1,
        "y": lambda t: t is not None and -1 <= t <= 0,
        "z": lambda t: t is None or t >= 0,
    }
    for ch, inside in arcs.items():
        if all(inside(t) for t in vals):
            return ch
    return None


def matrix_to_word(m: Matrix2) -> AutomorphismWord | None:
    """Reduced word with word_to_matrix(word) == m up to sign, or None when
    m is not congruent to the identity mod 2 (outside the generated group)."""
    if not m.is_identity_mod2() and not (-m).is_identity_mod2():
        return None
    letters: list[str] = []
    r = m
    while not r.eq_pgl(Matrix2.identity()):
        ch = _arc_letter(r)
        if ch is None or len(letters) > 10000:
            return None
        letters.append(ch)
        r = GENERATOR_MATRICES[ch] @ r
    w = reduce(letters)
    return w if word_to_matrix(w).eq_pgl(m) else None


def random_reduced_word(rng: random.Random, length: int) -> AutomorphismWord:
    letters: list[str] = []
    for _ in range(length):
        choices = [c for c in LETTERS if not letters or c != letters[-1]]
        letters.append(rng.choice(choices))
    return AutomorphismWord(tuple(letters))


def random_loxodromic_word(rng: random.Random, max_length: int = 8) -> AutomorphismWord:
    while True:
        w = random_reduced_word(rng, rng.randint(2, max_length))
        if classify(w) == "loxodromic":
            return w


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
