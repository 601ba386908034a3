"""Cyclic completions of the surface at infinity, as Farey polygons.

Boundary curves of a cyclic completion are indexed by points of P1(Q),
written as primitive vectors (p, q). Blowing up the corner between two
adjacent curves inserts their Farey mediant. An automorphism acts on the
vertices through its GL2(Z) matrix, and its pullback on divisors at
infinity is computed by the toric rule: write M v in the cone of the two
adjacent vertices that contains it.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import BudgetExceeded, EigenvalueMismatch, NotAdapted, NotAdjacent, NotLoxodromic
from .mcg import Matrix2, boundary_fixed_points, classify, spectral_radius
from .quadratic import QuadraticNumber
from .surface import inverse_map, matrix_of

MAX_CONTRACTING_POWER = 512


@dataclass(frozen=True, order=False)
class FareyVertex:
    """Primitive vector (p, q) with q > 0, or (1, 0) for infinity."""

    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if (p, q) == (0, 0):
            raise ValueError("zero vector is not a Farey vertex")
        g = gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def infinity(cls) -> "FareyVertex":
        return cls(1, 0)

    @classmethod
    def rational(cls, r) -> "FareyVertex":
        r = Fraction(r)
        return cls(r.numerator, r.denominator)

    @classmethod
    def parse(cls, text: str) -> "FareyVertex":
        t = text.strip()
        if t in ("inf", "oo", "infinity"):
            return cls.infinity()
        return cls.rational(Fraction(t))

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    @property
    def value(self) -> Fraction | None:
        return None if self.is_infinity else Fraction(self.p, self.q)

    def vector(self) -> tuple[int, int]:
        return self.p, self.q

    def angle_key(self):
        """Sort key along the circle: oo first, then decreasing p/q."""
        return (0, Fraction(0)) if self.is_infinity else (1, -Fraction(self.p, self.q))

    def __str__(self):
        if self.is_infinity:
            return "inf"
        return str(Fraction(self.p, self.q))


def _det(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def adjacent(v: FareyVertex, w: FareyVertex) -> bool:
    return abs(_det(v.vector(), w.vector())) == 1


def _lifts(a: FareyVertex, b: FareyVertex) -> tuple[tuple[int, int], tuple[int, int]]:
    """Lifts (a, s b) of an adjacent pair with det = +1; their positive cone
    is the arc of the circle running from a to b in increasing angle."""
    av, bv = a.vector(), b.vector()
    s = _det(av, bv)
    if abs(s) != 1:
        raise NotAdjacent(f"{a} and {b} are not Farey adjacent")
    return av, (s * bv[0], s * bv[1])


def _cone_coefficients(u, e1, e2):
    """(alpha, beta) with u = alpha e1 + beta e2 for a unimodular pair with
    det(e1, e2) = 1."""
    return _det(u, e2), _det(e1, u)


BASE_VERTICES = (FareyVertex(1, 0), FareyVertex(0, 1), FareyVertex(-1, 1))
BASE_INTERSECTION = ((-1, 1, 1), (1, -1, 1), (1, 1, -1))


@dataclass(frozen=True)
class CyclicCompletion:
    """Vertices in cyclic order (increasing angle, starting at oo) and the
    intersection matrix of the boundary curves in the same order."""

    vertices: tuple
    intersection: tuple

    def __post_init__(self):
        r = len(self.vertices)
        if r < 3:
            raise ValueError("a cyclic completion has at least three boundary curves")
        for i in range(r):
            if not adjacent(self.vertices[i], self.vertices[(i + 1) % r]):
                raise NotAdjacent(f"{self.vertices[i]} and {self.vertices[(i + 1) % r]} are not adjacent")
        if len(self.intersection) != r or any(len(row) != r for row in self.intersection):
            raise ValueError("intersection matrix has the wrong shape")

    def __len__(self):
        return len(self.vertices)

    def index(self, v: FareyVertex) -> int:
        return self.vertices.index(v)

    def corners(self) -> list[tuple[FareyVertex, FareyVertex]]:
        r = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % r]) for i in range(r)]

    def corner_of(self, t) -> int:
        """Index i of the corner whose open arc (v_i, v_{i+1}) contains the
        irrational boundary point t (a QuadraticNumber)."""
        for i, (a, b) in enumerate(self.corners()):
            if _in_open_arc(t, a, b):
                return i
        raise ValueError(f"{t} is a vertex of the completion")

    def matrix(self) -> np.ndarray:
        return np.array(self.intersection, dtype=object)

    def to_json(self) -> dict:
        return {
            "vertices": [str(v) for v in self.vertices],
            "intersection": [list(row) for row in self.intersection],
        }


def _in_open_arc(t, a: FareyVertex, b: FareyVertex) -> bool:
    """Exact test for a real boundary point t in the arc from a to b."""
    e1, e2 = _lifts(a, b)
    # t ~ (t, 1); inside iff both cone coefficients of +-(t, 1) are positive
    al = QuadraticNumber(0) + e2[1] * t - e2[0]
    be = QuadraticNumber(0) + e1[0] - e1[1] * t
    sa, sb = al.sign(), be.sign()
    return sa != 0 and sa == sb


def base_completion() -> CyclicCompletion:
    return CyclicCompletion(BASE_VERTICES, BASE_INTERSECTION)


def mediant(a: FareyVertex, b: FareyVertex) -> FareyVertex:
    e1, e2 = _lifts(a, b)
    return FareyVertex(e1[0] + e2[0], e1[1] + e2[1])


def blow_up(X: CyclicCompletion, corner) -> CyclicCompletion:
    """Blow up the corner between two consecutive vertices.

    corner is either the index i of the pair (v_i, v_{i+1}) or the pair itself.
    """
    r = len(X)
    if isinstance(corner, int):
        i = corner % r
    else:
        a, b = corner
        ia, ib = X.index(a), X.index(b)
        if (ia + 1) % r == ib:
            i = ia
        elif (ib + 1) % r == ia:
            i = ib
        else:
            raise NotAdjacent(f"{a} and {b} do not meet in this completion")
    j = (i + 1) % r
    new = mediant(X.vertices[i], X.vertices[j])
    old = [list(row) for row in X.intersection]
    old[i][i] -= 1
    old[j][j] -= 1
    old[i][j] = old[j][i] = 0
    # insert after position i (before j, or at the end when j wraps to 0)
    pos = i + 1
    verts = list(X.vertices[:pos]) + [new] + list(X.vertices[pos:])
    n = r + 1
    Q = [[0] * n for _ in range(n)]
    src = [k if k < pos else k - 1 for k in range(n)]
    for a in range(n):
        for b in range(n):
            if a != pos and b != pos:
                Q[a][b] = old[src[a]][src[b]]
    Q[pos][pos] = -1
    for k in (i, j):
        kk = k if k < pos else k + 1
        Q[pos][kk] = Q[kk][pos] = 1
    return CyclicCompletion(tuple(verts), tuple(tuple(row) for row in Q))


def mobius_vertex_action(m: Matrix2, v: FareyVertex) -> FareyVertex:
    return FareyVertex(*m.apply(*v.vector()))


# --- exact linear algebra ------------------------------------------------

def _q(v) -> QuadraticNumber:
    return v if isinstance(v, QuadraticNumber) else QuadraticNumber(Fraction(v))


def _row_reduce(A):
    """Reduced row echelon form over Q(sqrt d); returns (R, pivot columns)."""
    R = [[_q(v) for v in row] for row in A]
    rows, cols = len(R), len(R[0]) if R else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((k for k in range(r, rows) if R[k][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = R[r][c].inverse()
        R[r] = [v * inv for v in R[r]]
        for k in range(rows):
            if k != r and R[k][c] != 0:
                f = R[k][c]
                R[k] = [a - f * b for a, b in zip(R[k], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(A) -> int:
    return len(_row_reduce(A)[1])


def nullspace(A) -> list[list[QuadraticNumber]]:
    R, pivots = _row_reduce(A)
    n = len(A[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [QuadraticNumber(0)] * n
        v[f] = QuadraticNumber(1)
        for r, c in enumerate(pivots):
            v[c] = -R[r][f]
        basis.append(v)
    return basis


def signature(Q) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a rational symmetric matrix by
    congruence diagonalization."""
    A = [[Fraction(v) for v in row] for row in Q]
    n = len(A)
    pos = neg = 0
    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if j is not None:
                A[k], A[j] = A[j], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if j is None:
                    continue
                # add row/col j to row/col k; new diagonal 2 A[k][j] != 0
                for c in range(n):
                    A[k][c] += A[j][c]
                for row in A:
                    row[k] += row[j]
        p = A[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for r in range(k + 1, n):
            if A[r][k] != 0:
                f = A[r][k] / p
                for c in range(k, n):
                    A[r][c] -= f * A[k][c]
                for c in range(k, n):
                    A[c][r] = A[r][c]
    return pos, neg, n - pos - neg


def exact_det(Q) -> Fraction:
    A = [[Fraction(v) for v in row] for row in Q]
    n = len(A)
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for r in range(k + 1, n):
            f = A[r][k] / A[k][k]
            for c in range(k, n):
                A[r][c] -= f * A[k][c]
    return det


# --- divisors --------------------------------------------------------------

@dataclass(frozen=True)
class DivisorAtInfinity:
    vertices: tuple
    coefficients: tuple  # QuadraticNumber per vertex
    eigenvalue: QuadraticNumber | None = None
    power: int = 1

    def coefficient(self, v: FareyVertex) -> QuadraticNumber:
        return self.coefficients[self.vertices.index(v)]

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coefficients]

    def to_json(self) -> dict:
        out = {
            "coefficients": {str(v): str(c) for v, c in zip(self.vertices, self.coefficients)},
            "float": {str(v): float(c) for v, c in zip(self.vertices, self.coefficients)},
            "power": self.power,
        }
        if self.eigenvalue is not None:
            out["eigenvalue"] = str(self.eigenvalue)
        return out


def intersection_number(X: CyclicCompletion, D1, D2):
    """D1^T Q D2 for coefficient vectors or DivisorAtInfinity objects."""
    a = D1.coefficients if isinstance(D1, DivisorAtInfinity) else D1
    b = D2.coefficients if isinstance(D2, DivisorAtInfinity) else D2
    r = len(X)
    if len(a) != r or len(b) != r:
        raise ValueError("divisor is not supported on this completion")
    total = 0
    for i in range(r):
        if not a[i]:
            continue
        for j in range(r):
            if X.intersection[i][j] and b[j]:
                total = a[i] * X.intersection[i][j] * b[j] + total
    return total


def total_transform(X: CyclicCompletion, corner: int, D) -> list:
    """Coefficients of pi^* D on blow_up(X, corner): each curve through the
    blown-up point contributes its coefficient to the exceptional curve."""
    r = len(X)
    i, j = corner % r, (corner + 1) % r
    pos = i + 1
    out = list(D[:pos]) + [D[i] + D[j]] + list(D[pos:])
    return out


# --- pullback --------------------------------------------------------------

@dataclass(frozen=True)
class PullbackMatrix:
    """entries[v][w] = ord along E_v of f^* E_w, indexed like X.vertices."""

    entries: tuple
    word: str
    vertices: tuple

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def apply(self, D) -> list:
        r = len(self.entries)
        return [sum((self.entries[v][w] * D[w] for w in range(r) if self.entries[v][w]), 0 * D[0])
                for v in range(r)]

    def __matmul__(self, o: "PullbackMatrix") -> "PullbackMatrix":
        r = len(self.entries)
        e = tuple(tuple(sum(self.entries[i][k] * o.entries[k][j] for k in range(r)) for j in range(r))
                  for i in range(r))
        return PullbackMatrix(e, f"{self.word}*{o.word}", self.vertices)

    def power(self, k: int) -> "PullbackMatrix":
        r = len(self.entries)
        out = PullbackMatrix(tuple(tuple(int(i == j) for j in range(r)) for i in range(r)), "id", self.vertices)
        for _ in range(k):
            out = out @ self
        return out

    def column_is_zero(self, j: int) -> bool:
        return all(row[j] == 0 for row in self.entries)

    def spectral_radius(self) -> float:
        ev = np.linalg.eigvals(np.array(self.entries, dtype=float))
        return float(max(abs(ev)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["source"] + [str(v) for v in self.vertices])
        for v, row in zip(self.vertices, self.entries):
            wr.writerow([str(v)] + list(row))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"word": self.word, "vertices": [str(v) for v in self.vertices], "matrix": self.as_lists()}


def _locate(X: CyclicCompletion, u) -> tuple:
    """Where the primitive vector u sits: ('vertex', i) or
    ('corner', i, alpha, beta) with +-u = alpha e1 + beta e2, alpha, beta > 0."""
    target = FareyVertex(*u)
    for i, v in enumerate(X.vertices):
        if v == target:
            return ("vertex", i)
    for i, (a, b) in enumerate(X.corners()):
        e1, e2 = _lifts(a, b)
        for sgn in (1, -1):
            w = (sgn * u[0], sgn * u[1])
            al, be = _cone_coefficients(w, e1, e2)
            if al > 0 and be > 0:
                return ("corner", i, al, be)
    raise NotAdapted(f"{u} lies in no cone of the completion")


def _word_label(w) -> str:
    return str(w)


def pullback_matrix(w, X: CyclicCompletion) -> PullbackMatrix:
    m = matrix_of(w)
    r = len(X)
    P = [[0] * r for _ in range(r)]
    for v_idx, v in enumerate(X.vertices):
        loc = _locate(X, m.apply(*v.vector()))
        if loc[0] == "vertex":
            P[v_idx][loc[1]] += 1
        else:
            _, i, al, be = loc
            P[v_idx][i] += al
            P[v_idx][(i + 1) % r] += be
    return PullbackMatrix(tuple(tuple(row) for row in P), _word_label(w), X.vertices)


def toric_pullback(m: Matrix2, rays) -> list[list[int]]:
    """The same rule on an honest complete fan of R^2 (rays in counterclockwise
    order, cones between consecutive rays)."""
    r = len(rays)
    P = [[0] * r for _ in range(r)]
    for vi, v in enumerate(rays):
        u = m.apply(*v)
        for i in range(r):
            e1, e2 = rays[i], rays[(i + 1) % r]
            if _det(e1, e2) != 1:
                raise NotAdjacent("fan is not smooth")
            al, be = _cone_coefficients(u, e1, e2)
            if al >= 0 and be >= 0:
                P[vi][i] += al
                P[vi][(i + 1) % r] += be
                break
        else:
            raise NotAdapted(f"{u} outside the fan")
    return P


# --- stability and adapted completions --------------------------------------

def _corner_image(m: Matrix2, X: CyclicCompletion, i: int):
    """Corner containing the image of corner i, or None if the corner is an
    indeterminacy point (its image cone meets a ray of X)."""
    a, b = X.corners()[i]
    e1, e2 = _lifts(a, b)
    g1, g2 = m.apply(*e1), m.apply(*e2)
    for k, (c, d) in enumerate(X.corners()):
        f1, f2 = _lifts(c, d)
        for sgn in (1, -1):
            c1 = _cone_coefficients((sgn * g1[0], sgn * g1[1]), f1, f2)
            c2 = _cone_coefficients((sgn * g2[0], sgn * g2[1]), f1, f2)
            if min(c1 + c2) >= 0:
                return k
    return None


def indeterminate_corners(w, X: CyclicCompletion) -> list[int]:
    m = matrix_of(w)
    return [i for i in range(len(X)) if _corner_image(m, X, i) is None]


def unstable_corners(w, X: CyclicCompletion) -> list[int]:
    """Indeterminacy corners reached by the forward orbit of a contracted curve.

    The map is algebraically stable over X exactly when this list is empty.
    """
    m = matrix_of(w)
    r = len(X)
    image = {i: _corner_image(m, X, i) for i in range(r)}
    bad = set()
    for v in X.vertices:
        loc = _locate(X, m.apply(*v.vector()))
        if loc[0] == "vertex":
            continue
        c = loc[1]
        seen = set()
        while c is not None and c not in seen:
            seen.add(c)
            nxt = image[c]
            if nxt is None:
                bad.add(c)
                break
            c = nxt
    return sorted(bad)


@dataclass(frozen=True)
class AdaptedCompletion:
    completion: CyclicCompletion
    p_plus: int  # corner index
    p_minus: int
    contracting_power: int
    blowups: int

    def corner_pair(self, i: int) -> tuple:
        return self.completion.corners()[i]

    def to_json(self) -> dict:
        pp, pm = self.corner_pair(self.p_plus), self.corner_pair(self.p_minus)
        return {
            "completion": self.completion.to_json(),
            "p_plus": [str(pp[0]), str(pp[1])],
            "p_minus": [str(pm[0]), str(pm[1])],
            "contracting_power": self.contracting_power,
            "blowups": self.blowups,
        }


def contracting_power(w, X: CyclicCompletion, p_plus: int, n_max: int = MAX_CONTRACTING_POWER) -> int | None:
    """Smallest N with every vertex sent by M^N into the closed arc at p_plus."""
    m = matrix_of(w)
    a, b = X.corners()[p_plus]
    e1, e2 = _lifts(a, b)
    mk = Matrix2.identity()
    for N in range(1, n_max + 1):
        mk = m @ mk
        ok = True
        for v in X.vertices:
            u = mk.apply(*v.vector())
            c = _cone_coefficients(u, e1, e2)
            c2 = _cone_coefficients((-u[0], -u[1]), e1, e2)
            if min(c) < 0 and min(c2) < 0:
                ok = False
                break
        if ok:
            return N
    return None


def adapted_completion(w, max_blowups: int = 64, X: CyclicCompletion | None = None) -> AdaptedCompletion:
    """Blow up corners until alpha(f) and omega(f) sit in distinct corners and
    both f and its inverse are algebraically stable."""
    m = matrix_of(w)
    if classify(m) != "loxodromic":
        raise NotLoxodromic(f"{w} is not loxodromic")
    bfp = boundary_fixed_points(m)
    X = X or base_completion()
    winv = inverse_map(w)
    count = 0
    while True:
        ip, im = X.corner_of(bfp.omega), X.corner_of(bfp.alpha)
        todo: list[int] = []
        if ip == im:
            todo = [ip]
        else:
            todo = sorted(set(unstable_corners(w, X)) | set(unstable_corners(winv, X)))
        if not todo:
            N = contracting_power(w, X, ip)
            if N is None:
                raise BudgetExceeded(f"no contracting power up to {MAX_CONTRACTING_POWER}")
            return AdaptedCompletion(X, ip, im, N, count)
        if count + 1 > max_blowups:
            raise BudgetExceeded(f"completion not adapted after {max_blowups} blow-ups")
        # blow up one corner at a time; indices shift after each insertion
        X = blow_up(X, todo[0])
        count += 1


def refine_toward_fixed_points(w, ad: AdaptedCompletion, tol, max_blowups: int = 64) -> AdaptedCompletion:
    """Blow up the corners at p+ and p- alternately until the normalized
    eigen-divisors satisfy (theta+)^2 <= tol and (theta-)^2 <= tol.

    On a fixed completion the incarnations have positive self-intersection;
    it decreases to the Picard-Manin value 0 as the completion is refined
    around the two boundary fixed points. max_blowups bounds the total count,
    including the blow-ups already spent by ad.
    """
    m = matrix_of(w)
    bfp = boundary_fixed_points(m)
    tol = Fraction(tol)
    X = ad.completion
    count = ad.blowups
    turn = 0
    while True:
        tp = theta_plus(w, X)
        tm = theta_minus(w, X)
        sp, sm = intersection_number(X, tp, tp), intersection_number(X, tm, tm)
        if sp <= tol and sm <= tol:
            break
        if count + 1 > max_blowups:
            raise BudgetExceeded(f"self-intersections {float(sp):.3g}, {float(sm):.3g} above {tol} "
                                 f"after {max_blowups} blow-ups")
        # theta+ fails to be Cartier only above alpha, theta- only above omega
        if sp > tol and (sm <= tol or turn == 0):
            target = bfp.alpha
        else:
            target = bfp.omega
        turn ^= 1
        X = blow_up(X, X.corner_of(target))
        count += 1
        # keep the completion adapted (stable for f and its inverse)
        X, count = _stabilize(w, X, count, max_blowups)
    ip, im = X.corner_of(bfp.omega), X.corner_of(bfp.alpha)
    N = contracting_power(w, X, ip)
    if N is None:
        raise BudgetExceeded(f"no contracting power up to {MAX_CONTRACTING_POWER}")
    return AdaptedCompletion(X, ip, im, N, count)


def _stabilize(w, X, count, max_blowups):
    winv = inverse_map(w)
    while True:
        todo = sorted(set(unstable_corners(w, X)) | set(unstable_corners(winv, X)))
        if not todo:
            return X, count
        if count + 1 > max_blowups:
            raise BudgetExceeded(f"completion not stable after {max_blowups} blow-ups")
        X = blow_up(X, todo[0])
        count += 1


def stability_check(w, X: CyclicCompletion, k_max: int = 4) -> bool:
    """pullback(w^k) == pullback(w)^k for 1 <= k <= k_max, exactly."""
    m = matrix_of(w)
    P = pullback_matrix(m, X)
    Pk = P
    for k in range(2, k_max + 1):
        Pk = Pk @ P
        if pullback_matrix(m.power(k), X).entries != Pk.entries:
            return False
    return True


def _block_eigenvector(B, mu) -> tuple:
    """Eigenvector of the 2x2 integer matrix B for the eigenvalue mu."""
    (b00, b01), (b10, b11) = B
    if b01 != 0:
        return _q(b01), mu - b00
    if b10 != 0:
        return mu - b11, _q(b10)
    if mu == b00:
        return _q(1), _q(0)
    return _q(0), _q(1)


def _corner_eigenvector(PN: PullbackMatrix, corner: int, muN) -> list[QuadraticNumber]:
    """Eigenvector of a contracting pullback for the eigenvalue muN.

    All columns off the two curves E, F through the corner vanish, so the
    vector is PN (a E + b F) / muN with (a, b) an eigenvector of the 2x2 block.
    """
    r = len(PN.entries)
    i, j = corner % r, (corner + 1) % r
    e = PN.entries
    a, b = _block_eigenvector(((e[i][i], e[i][j]), (e[j][i], e[j][j])), muN)
    inv = _q(1) / muN
    return [(a * e[k][i] + b * e[k][j]) * inv for k in range(r)]


def _check_eigen(P: PullbackMatrix, v, mu, what: str):
    img = P.apply(v)
    if any(x != mu * y for x, y in zip(img, v)):
        raise EigenvalueMismatch(f"{what} is not an eigenvector for {mu}; the completion is not adapted")


def _perron(w, X: CyclicCompletion, corner: int | None = None) -> list[QuadraticNumber]:
    m = matrix_of(w)
    lam = spectral_radius(m)
    P = pullback_matrix(m, X)
    rho = P.spectral_radius()
    if abs(rho - float(lam)) > 1e-9:
        raise EigenvalueMismatch(f"Perron value {rho} differs from lambda1 {float(lam)}")
    if corner is None:
        corner = X.corner_of(boundary_fixed_points(m).omega)
    N = contracting_power(m, X, corner)
    if N is None:
        raise NotAdapted("no contracting power")
    v = _corner_eigenvector(pullback_matrix(m.power(N), X), corner, lam ** N)
    signs = {c.sign() for c in v if c != 0}
    if signs == {-1}:
        v = [-c for c in v]
    elif len(signs) != 1:
        raise EigenvalueMismatch("Perron eigenvector is not of one sign")
    _check_eigen(P, v, lam, "theta")
    return v


def _hyperplane_degree(X: CyclicCompletion, v) -> QuadraticNumber | None:
    """D . pi^*H for the hyperplane section H = sum of the three base curves:
    the sum of the coefficients on the base vertices."""
    if not all(b in X.vertices for b in BASE_VERTICES):
        return None
    return sum((v[X.index(b)] for b in BASE_VERTICES), _q(0))


def theta_plus(w, X: CyclicCompletion) -> DivisorAtInfinity:
    """Nonnegative lambda1-eigenvector of f^*.

    Scaled by theta+ . pi^*H = 1, which does not depend on the completion;
    max coefficient 1 when X does not refine the base triangle.
    """
    v = _perron(w, X)
    scale = _hyperplane_degree(X, v) or max(v)
    v = [c / scale for c in v]
    return DivisorAtInfinity(X.vertices, tuple(v), spectral_radius(matrix_of(w)), 1)


def theta_minus(w, X: CyclicCompletion) -> DivisorAtInfinity:
    """theta+ of the inverse, scaled so that theta+ . theta- = 1."""
    tp = theta_plus(w, X)
    v = _perron(inverse_map(w), X)
    s = intersection_number(X, tp.coefficients, v)
    if s == 0:
        raise EigenvalueMismatch("theta+ . theta- vanishes")
    v = [c / s for c in v]
    return DivisorAtInfinity(X.vertices, tuple(v), spectral_radius(matrix_of(w)), 1)


def d_minus(w, X: CyclicCompletion, p_plus: int | None = None) -> DivisorAtInfinity:
    """Eigenvector of (f^N)^* for 1/lambda1^N, N the contracting power.

    With E, F the curves through p+ and (g, d) the 1/lambda1^N eigenvector
    of the 2x2 block, (f^N)^*(g E + d F) = (g E + d F)/lambda1^N + R and
    D- = g E + d F + lambda1^N R. N is taken even for orientation reversing
    words so that the block has eigenvalue 1/lambda1^N. Normalized so that
    the coefficient on E is 1.
    """
    m = matrix_of(w)
    lam = spectral_radius(m)
    if p_plus is None:
        p_plus = X.corner_of(boundary_fixed_points(m).omega)
    N = contracting_power(m, X, p_plus)
    if N is None:
        raise NotAdapted("no contracting power")
    if m.det == -1 and N % 2:
        N += 1
    PN = pullback_matrix(m.power(N), X)
    r = len(X)
    i, j = p_plus % r, (p_plus + 1) % r
    e = PN.entries
    lamN = lam ** N
    mu = _q(1) / lamN
    g, d = _block_eigenvector(((e[i][i], e[i][j]), (e[j][i], e[j][j])), mu)
    base = [_q(0)] * r
    base[i], base[j] = g, d
    img = PN.apply(base)
    R = [x - mu * y for x, y in zip(img, base)]
    if R[i] != 0 or R[j] != 0:
        raise EigenvalueMismatch("block eigenvector does not close up")
    v = [y + lamN * z for y, z in zip(base, R)]
    lead = v[i] if v[i] != 0 else v[j]
    v = [c / lead for c in v]
    _check_eigen(PN, v, mu, "D-")
    return DivisorAtInfinity(X.vertices, tuple(v), mu, N)


def eigen_residual(w, X: CyclicCompletion, D: DivisorAtInfinity):
    """Exact sup norm of (f^N)^* D - mu D with N = D.power."""
    m = matrix_of(w)
    P = pullback_matrix(m.power(D.power), X)
    img = P.apply(list(D.coefficients))
    return max(abs(_q(a) - D.eigenvalue * b) for a, b in zip(img, D.coefficients))


@dataclass(frozen=True)
class DivisorReport:
    adapted: AdaptedCompletion
    pullback: PullbackMatrix
    contracting_pullback: PullbackMatrix
    theta_plus: DivisorAtInfinity
    theta_minus: DivisorAtInfinity
    d_minus: DivisorAtInfinity
    lambda1: QuadraticNumber
    perron_value: float
    stable: bool

    def to_json(self) -> dict:
        X = self.adapted.completion
        return {
            "adapted": self.adapted.to_json(),
            "lambda1": str(self.lambda1),
            "lambda1_float": float(self.lambda1),
            "perron_value": self.perron_value,
            "pullback": self.pullback.to_json(),
            "contracting_pullback": self.contracting_pullback.to_json(),
            "theta_plus": self.theta_plus.to_json(),
            "theta_minus": self.theta_minus.to_json(),
            "d_minus": self.d_minus.to_json(),
            "theta_plus_self_intersection": float(intersection_number(X, self.theta_plus, self.theta_plus)),
            "d_minus_dot_theta_minus": float(intersection_number(X, self.d_minus, self.theta_minus)),
            "stable_k4": self.stable,
        }


def divisor_report(w, max_blowups: int = 64, isotropy_tol: float | None = 1e-8) -> DivisorReport:
    """Adapted completion, refined until (theta+-)^2 <= isotropy_tol (skip the
    refinement with None), and the eigen-divisors on it."""
    ad = adapted_completion(w, max_blowups)
    if isotropy_tol is not None:
        ad = refine_toward_fixed_points(w, ad, isotropy_tol, max_blowups)
    X = ad.completion
    m = matrix_of(w)
    P = pullback_matrix(w, X)
    return DivisorReport(
        adapted=ad,
        pullback=P,
        contracting_pullback=pullback_matrix(m.power(ad.contracting_power), X),
        theta_plus=theta_plus(w, X),
        theta_minus=theta_minus(w, X),
        d_minus=d_minus(w, X, ad.p_plus),
        lambda1=spectral_radius(m),
        perron_value=P.spectral_radius(),
        stable=stability_check(w, X, 4),
    )
