"""Trace coordinates of SL2 pairs and the Nielsen moves acting on them."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import mpmath

from .mcg import Matrix2
from .surface import SurfacePoint, apply_coords, kappa, scalar_from_json, scalar_to_json

Mat = tuple  # (a, b, c, d) row-major


def mat_mul(P: Mat, Q: Mat) -> Mat:
    a, b, c, d = P
    e, f, g, h = Q
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_det(P: Mat):
    return P[0] * P[3] - P[1] * P[2]


def mat_trace(P: Mat):
    return P[0] + P[3]


def mat_inv_sl2(P: Mat) -> Mat:
    """Inverse of a determinant-one matrix (the adjugate)."""
    a, b, c, d = P
    return (d, -b, -c, a)


@dataclass(frozen=True)
class SL2Pair:
    A: Mat
    B: Mat

    def determinants(self):
        return mat_det(self.A), mat_det(self.B)

    def to_json(self) -> dict:
        def m(P):
            return [[scalar_to_json(P[0]), scalar_to_json(P[1])], [scalar_to_json(P[2]), scalar_to_json(P[3])]]

        return {"A": m(self.A), "B": m(self.B)}

    @classmethod
    def from_json(cls, d: dict) -> "SL2Pair":
        def m(rows):
            return tuple(scalar_from_json(v) for row in rows for v in row)

        return cls(m(d["A"]), m(d["B"]))


def _field_of(v: Any) -> str:
    return "rational" if isinstance(v, (Fraction, int)) else "complex"


def trace_coordinates(rho: SL2Pair) -> SurfacePoint:
    x = mat_trace(rho.A)
    y = mat_trace(rho.B)
    z = mat_trace(mat_mul(rho.A, rho.B))
    D = x * x + y * y + z * z - x * y * z
    fld = "rational" if all(_field_of(v) == "rational" for v in rho.A + rho.B) else "complex"
    prec = None if fld == "rational" else mpmath.mp.prec
    if fld == "rational":
        x, y, z, D = (Fraction(v) for v in (x, y, z, D))
    return SurfacePoint(x, y, z, D, fld, prec)


def commutator_trace(rho: SL2Pair):
    A, B = rho.A, rho.B
    K = mat_mul(mat_mul(A, B), mat_mul(mat_inv_sl2(A), mat_inv_sl2(B)))
    return mat_trace(K)


def conjugate(rho: SL2Pair, C: Mat) -> SL2Pair:
    Ci = mat_inv_sl2(C)
    return SL2Pair(mat_mul(mat_mul(C, rho.A), Ci), mat_mul(mat_mul(C, rho.B), Ci))


NIELSEN_MOVES = ("invert_a", "b_to_ab", "swap")


def nielsen_action(move: str, rho: SL2Pair) -> SL2Pair:
    A, B = rho.A, rho.B
    if move == "invert_a":
        return SL2Pair(mat_inv_sl2(A), B)
    if move == "b_to_ab":
        return SL2Pair(A, mat_mul(A, B))
    if move == "swap":
        return SL2Pair(B, A)
    raise ValueError(f"unknown Nielsen move {move!r}")


# Induced action on trace coordinates, as surface moves (leftmost outermost)
# and as the matrix acting on the abelianised free group. invert_a is the
# Vieta involution in z; the other two involve the coordinate swap S,
# which lies outside the group generated by the three involutions.
NIELSEN_TABLE = {
    "invert_a": {"moves": ("z",), "matrix": Matrix2(-1, 0, 0, 1)},
    "b_to_ab": {"moves": ("S", "T", "S"), "matrix": Matrix2(1, 0, 1, 1)},
    "swap": {"moves": ("S",), "matrix": Matrix2(0, 1, 1, 0)},
}


def induced_coordinates(move: str, p: SurfacePoint) -> SurfacePoint:
    return p.with_coords(*apply_coords(NIELSEN_TABLE[move]["moves"], *p.coords()))


_ELEMENTARY = [(1, 1, 0, 1), (1, -1, 0, 1), (1, 0, 1, 1), (1, 0, -1, 1), (0, -1, 1, 0), (0, 1, -1, 0)]


def random_sl2_integer(rng: random.Random, bound: int = 9, max_factors: int = 12) -> Mat:
    """Product of elementary SL2(Z) matrices, kept while all entries lie in [-bound, bound]."""
    M: Mat = (1, 0, 0, 1)
    for _ in range(rng.randint(0, max_factors)):
        N = mat_mul(M, rng.choice(_ELEMENTARY))
        if max(abs(v) for v in N) <= bound:
            M = N
    return tuple(Fraction(v) for v in M)


def random_sl2_pair(rng: random.Random, bound: int = 9) -> SL2Pair:
    return SL2Pair(random_sl2_integer(rng, bound), random_sl2_integer(rng, bound))


def kappa_at_traces(rho: SL2Pair):
    return kappa(trace_coordinates(rho))
