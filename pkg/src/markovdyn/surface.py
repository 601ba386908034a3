"""Points of the surface x^2 + y^2 + z^2 = xyz + D and the action of words.

Coordinates may be any scalars supporting +, - and *: Fractions (exact),
mpmath numbers (big floats, real or complex), mpmath.iv intervals, or
PAdic elements. The surface maps are polynomial, so the same code runs
over every field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from .errors import NotFixed, PrecisionExhausted, SingularPoint
from .mcg import AutomorphismWord, Matrix2, elementary_factors, matrix_to_word, spectral_radius, word_to_matrix
from .padic import PAdic

DEFAULT_ESCAPE_RADIUS = 1e8
MEMBERSHIP_SCALE = 1e-10
MAX_EXPONENT_BITS = 2 ** 40


def precision_for(n: int, lambda1: float, base: int = 64) -> int:
    """Mantissa bits for n iterations: ceil(n log2 lambda1) + base."""
    if lambda1 <= 1:
        return base
    return int(math.ceil(n * math.log2(lambda1))) + base


@dataclass(frozen=True)
class SurfacePoint:
    x: Any
    y: Any
    z: Any
    D: Any
    field: str = "rational"
    precision_bits: int | None = None

    def coords(self) -> tuple:
        return (self.x, self.y, self.z)

    def with_coords(self, x, y, z) -> "SurfacePoint":
        return SurfacePoint(x, y, z, self.D, self.field, self.precision_bits)

    @classmethod
    def rational(cls, x, y, z, D=None) -> "SurfacePoint":
        x, y, z = Fraction(x), Fraction(y), Fraction(z)
        if D is None:
            D = x * x + y * y + z * z - x * y * z
        return cls(x, y, z, Fraction(D), "rational", None)

    @classmethod
    def mp(cls, x, y, z, D=None, prec: int = 128) -> "SurfacePoint":
        with mpmath.workprec(prec):
            x, y, z = (mpmath.mpmathify(c) for c in (x, y, z))
            if D is None:
                D = x * x + y * y + z * z - x * y * z
            D = mpmath.mpmathify(D)
        return cls(x, y, z, D, "complex", prec)

    def to_mp(self, prec: int = 128) -> "SurfacePoint":
        def conv(c):
            if isinstance(c, Fraction):
                return mpmath.mpf(c.numerator) / c.denominator
            return mpmath.mpmathify(c)

        with mpmath.workprec(prec):
            return SurfacePoint(*(conv(c) for c in (self.x, self.y, self.z, self.D)), "complex", prec)

    def to_json(self) -> dict:
        return {
            "x": scalar_to_json(self.x),
            "y": scalar_to_json(self.y),
            "z": scalar_to_json(self.z),
            "D": scalar_to_json(self.D),
            "field": self.field,
            "precision_bits": self.precision_bits,
        }


def scalar_to_json(c):
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return f"{c}/1"
    if isinstance(c, (mpmath.mpc, complex)):
        return [mpmath.nstr(mpmath.mpf(c.real), 30), mpmath.nstr(mpmath.mpf(c.imag), 30)]
    if isinstance(c, PAdic):
        return repr(c)
    try:
        return mpmath.nstr(mpmath.mpmathify(c), 30)
    except (TypeError, ValueError):
        return str(c)


def scalar_from_json(s):
    if isinstance(s, list):
        return mpmath.mpc(s[0], s[1])
    if isinstance(s, str) and "/" in s:
        return Fraction(s)
    return mpmath.mpf(s)


def point_from_json(d: dict) -> SurfacePoint:
    vals = [scalar_from_json(d[k]) for k in ("x", "y", "z", "D")]
    return SurfacePoint(*vals, d.get("field", "rational"), d.get("precision_bits"))


# Elementary moves. Letters x, y, z are the Vieta involutions; S, T, U, N
# realise the remaining elementary matrices of GL2(Z) (swap, the two
# transvections, and -I, which acts trivially).
def _move(tag: str, x, y, z):
    if tag == "x":
        return y * z - x, y, z
    if tag == "y":
        return x, x * z - y, z
    if tag == "z":
        return x, y, x * y - z
    if tag == "S":
        return y, x, z
    if tag == "T":
        return z, y, y * z - x
    if tag == "U":
        return x * y - z, y, x
    if tag == "N":
        return x, y, z
    raise ValueError(f"unknown move {tag!r}")


def _move_jacobian(tag: str, x, y, z):
    one, zero = 1, 0
    if tag == "x":
        return [[-one, z, y], [zero, one, zero], [zero, zero, one]]
    if tag == "y":
        return [[one, zero, zero], [z, -one, x], [zero, zero, one]]
    if tag == "z":
        return [[one, zero, zero], [zero, one, zero], [y, x, -one]]
    if tag == "S":
        return [[zero, one, zero], [one, zero, zero], [zero, zero, one]]
    if tag == "T":
        return [[zero, zero, one], [zero, one, zero], [-one, z, y]]
    if tag == "U":
        return [[y, x, -one], [zero, one, zero], [one, zero, zero]]
    if tag == "N":
        return [[one, zero, zero], [zero, one, zero], [zero, zero, one]]
    raise ValueError(f"unknown move {tag!r}")


def moves_of(f) -> tuple[str, ...]:
    """Move sequence (leftmost outermost) for a word, a matrix, or a move list."""
    if isinstance(f, AutomorphismWord):
        return f.letters
    if isinstance(f, Matrix2):
        # prefer a Vieta word when one exists: those evaluate without
        # catastrophic cancellation along escaping orbits
        w = matrix_to_word(f)
        if w is not None:
            return w.letters
        return tuple(elementary_factors(f))
    if isinstance(f, str):
        return AutomorphismWord.parse(f).letters
    return tuple(f)


def matrix_of(f) -> Matrix2:
    if isinstance(f, Matrix2):
        return f
    if isinstance(f, AutomorphismWord):
        return word_to_matrix(f)
    if isinstance(f, str):
        return word_to_matrix(AutomorphismWord.parse(f))
    raise TypeError("cannot determine the matrix of a raw move list")


def inverse_map(f):
    if isinstance(f, AutomorphismWord):
        return f.inverse()
    if isinstance(f, Matrix2):
        return f.inverse()
    if isinstance(f, str):
        return AutomorphismWord.parse(f).inverse()
    raise TypeError("unsupported map type")


def map_power(f, k: int):
    if isinstance(f, AutomorphismWord):
        return f.power(k)
    if isinstance(f, Matrix2):
        return f.power(k)
    if isinstance(f, str):
        return AutomorphismWord.parse(f).power(k)
    raise TypeError("unsupported map type")


def _magnitude_ok(c) -> bool:
    if isinstance(c, (mpmath.mpf, mpmath.mpc)):
        return mpmath.mag(c) < MAX_EXPONENT_BITS if c != 0 else True
    if isinstance(c, (float, complex)):
        return math.isfinite(abs(c))
    return True


def vieta(letter: str, p: SurfacePoint) -> SurfacePoint:
    return p.with_coords(*_move(letter, *p.coords()))


def apply_coords(moves: Sequence[str], x, y, z):
    for tag in reversed(moves):
        x, y, z = _move(tag, x, y, z)
        if not (_magnitude_ok(x) and _magnitude_ok(y) and _magnitude_ok(z)):
            raise PrecisionExhausted("coordinate magnitude left the representable range")
    return x, y, z


def apply(w, p: SurfacePoint) -> SurfacePoint:
    """Apply a word (rightmost letter first), matrix or move list to p."""
    if p.precision_bits:
        with mpmath.workprec(p.precision_bits):
            return p.with_coords(*apply_coords(moves_of(w), *p.coords()))
    return p.with_coords(*apply_coords(moves_of(w), *p.coords()))


def residual(p: SurfacePoint):
    x, y, z = p.coords()
    return x * x + y * y + z * z - x * y * z - p.D


def kappa(p: SurfacePoint):
    x, y, z = p.coords()
    return x * x + y * y + z * z - x * y * z - 2


def gradient(p: SurfacePoint):
    x, y, z = p.coords()
    return (2 * x - y * z, 2 * y - x * z, 2 * z - x * y)


def sup_norm(p: SurfacePoint):
    return max(abs(c) for c in p.coords())


def on_surface(p: SurfacePoint, scale: float = MEMBERSHIP_SCALE) -> bool:
    r = residual(p)
    if isinstance(r, Fraction):
        return r == 0
    m = sup_norm(p)
    return abs(r) <= scale * (1 + m) ** 3


@dataclass
class Trajectory:
    points: list = field(default_factory=list)
    escaped: bool = False
    escape_index: int | None = None


def orbit(w, p: SurfacePoint, n_max: int, escape_radius: float = DEFAULT_ESCAPE_RADIUS) -> Trajectory:
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    traj = Trajectory([p])
    q = p
    if sup_norm(q) > escape_radius:
        traj.escaped, traj.escape_index = True, 0
        return traj
    for n in range(1, n_max + 1):
        q = apply(w, q)
        traj.points.append(q)
        if sup_norm(q) > escape_radius:
            traj.escaped, traj.escape_index = True, n
            break
    return traj


def _matmul3(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def ambient_jacobian_coords(moves: Sequence[str], x, y, z):
    """Return (image, 3x3 Jacobian) of the move sequence at (x, y, z)."""
    J = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    for tag in reversed(moves):
        Jm = _move_jacobian(tag, x, y, z)
        J = _matmul3(Jm, J)
        x, y, z = _move(tag, x, y, z)
    return (x, y, z), J


def restricted_matrix(J, grad):
    """2x2 matrix of J on the plane grad . v = 0 in the chart dropping the
    coordinate with largest |grad| component."""
    k = max(range(3), key=lambda i: abs(grad[i]))
    keep = [i for i in range(3) if i != k]
    basis = []
    for i in keep:
        v = [0, 0, 0]
        v[i] = 1
        v[k] = -grad[i] / grad[k]
        basis.append(v)
    R = [[None, None], [None, None]]
    for col, v in enumerate(basis):
        Jv = [sum(J[r][c] * v[c] for c in range(3)) for r in range(3)]
        for row, i in enumerate(keep):
            R[row][col] = Jv[i]
    return R


def eig2(R):
    """Eigenvalues of a 2x2 matrix via the quadratic formula (mpmath)."""
    tr = R[0][0] + R[1][1]
    det = R[0][0] * R[1][1] - R[0][1] * R[1][0]
    disc = mpmath.sqrt(mpmath.mpc(tr * tr - 4 * det))
    e1, e2 = (tr + disc) / 2, (tr - disc) / 2
    if abs(e1) < abs(e2):
        e1, e2 = e2, e1
    return e1, e2


def jacobian_restricted(w, p: SurfacePoint, tol: float | None = None):
    """Eigenvalues of the differential of w at a regular fixed point p,
    restricted to the tangent plane of the surface."""
    prec = p.precision_bits or 128
    with mpmath.workprec(prec):
        q = p.to_mp(prec) if p.field != "complex" else p
        x, y, z = q.coords()
        grad = gradient(q)
        scale = 1 + max(abs(c) for c in (x, y, z))
        gnorm = max(abs(g) for g in grad)
        if gnorm <= mpmath.mpf(2) ** (-prec // 2) * scale ** 2:
            raise SingularPoint(f"gradient vanishes at {p.coords()}")
        image, J = ambient_jacobian_coords(moves_of(w), x, y, z)
        if tol is None:
            tol = 1e-10 * float(scale)
        defect = max(abs(a - b) for a, b in zip(image, (x, y, z)))
        if defect > tol:
            raise NotFixed(f"map moves the point by {mpmath.nstr(defect, 5)}")
        return eig2(restricted_matrix(J, grad))


def solve_z(x, y, D, branch: int = 1):
    """Roots of z^2 - xy z + (x^2 + y^2 - D) = 0; branch +1 or -1."""
    disc = mpmath.sqrt(x * x * y * y - 4 * (x * x + y * y - D))
    return (x * y + branch * disc) / 2


def lambda_of(w) -> float:
    return float(spectral_radius(matrix_of(w)))
