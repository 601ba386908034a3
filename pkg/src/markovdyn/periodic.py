"""Certified periodic points of surface automorphisms.

Search: vectorized Gauss-Newton on the overdetermined system
(h - D, f^n(p) - p) from a grid of starting points (x, y) with both roots z
of the defining quadratic. Survivors are polished in big floats and
certified by a Krawczyk test on the square system obtained by dropping the
component of f^n(p) - p along the largest entry of grad h. The output is a
certified subset of the periodic points, never a claim of completeness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import NotLoxodromic, PrecisionExhausted, SingularPoint
from .interval import CInterval, krawczyk, precision
from .mcg import classify
from .surface import (
    DEFAULT_ESCAPE_RADIUS,
    SurfacePoint,
    ambient_jacobian_coords,
    apply_coords,
    matrix_of,
    moves_of,
)

CERT_PRECISION = 128
SADDLE_EPS = 1e-9


@dataclass
class CertifiedPeriodicPoint:
    point: SurfacePoint
    period: int
    box: tuple  # three CIntervals; zero width for exactly verified points
    eigenvalues: tuple | None  # restricted eigenvalues of D(f^n), complex
    modulus_bounds: tuple | None  # ((lo, hi), (lo, hi)) enclosing |e1|, |e2|
    label: str = "unclassified"
    minimal_period: int | None = None
    certified_by: str = "krawczyk"
    real: bool = False
    trace_bounds: tuple | None = None  # enclosure of e1 + e2 when real
    det_sign: int = 1

    def width(self) -> float:
        return float(max(b.width() for b in self.box))

    def contains(self, coords) -> bool:
        return all(b.contains(c) for b, c in zip(self.box, coords))

    def overlaps(self, other: "CertifiedPeriodicPoint", inflate: float = 1.0) -> bool:
        mine = [b.inflate(inflate) if inflate != 1 else b for b in self.box]
        theirs = [b.inflate(inflate) if inflate != 1 else b for b in other.box]
        return all(a.intersects(b) for a, b in zip(mine, theirs))

    def coords(self) -> tuple:
        return self.point.coords()

    def to_json(self) -> dict:
        def cnum(c):
            return [mpmath.nstr(mpmath.mpf(c.real), 20), mpmath.nstr(mpmath.mpf(c.imag), 20)]

        return {
            "period": self.period,
            "minimal_period": self.minimal_period,
            "center": [cnum(mpmath.mpmathify(c)) for c in self.point.coords()],
            "box": [b.to_json() for b in self.box],
            "eigenvalues": None if self.eigenvalues is None else [cnum(e) for e in self.eigenvalues],
            "modulus_bounds": None if self.modulus_bounds is None else [list(b) for b in self.modulus_bounds],
            "label": self.label,
            "certified_by": self.certified_by,
        }


def _mpD(D):
    if isinstance(D, Fraction):
        return mpmath.mpf(D.numerator) / D.denominator
    return mpmath.mpmathify(D)


def _h(x, y, z):
    return x * x + y * y + z * z - x * y * z


def _grad(x, y, z):
    return (2 * x - y * z, 2 * y - x * z, 2 * z - x * y)


def singular_points(D) -> list[tuple[int, int, int]]:
    """Singular points of the surface: only D = 0 and D = 4 have any."""
    try:
        Dq = Fraction(D) if not isinstance(D, (complex, mpmath.mpc)) else None
    except (TypeError, ValueError):
        Dq = None
    if Dq is None:
        c = complex(D)
        if c.imag != 0:
            return []
        Dq = Fraction(c.real)
    if Dq == 0:
        return [(0, 0, 0)]
    if Dq == 4:
        return [(2, 2, 2), (2, -2, -2), (-2, 2, -2), (-2, -2, 2)]
    return []


def _exact_singular_periodic(moves, D, n) -> list[CertifiedPeriodicPoint]:
    out = []
    for s in singular_points(D):
        pt = tuple(Fraction(c) for c in s)
        q = pt
        for _ in range(n):
            q = apply_coords(moves, *q)
        if q != pt:
            continue
        # minimal period, exactly
        q, mp_ = pt, n
        for d in range(1, n + 1):
            q = apply_coords(moves, *q)
            if q == pt:
                mp_ = d
                break
        with precision(CERT_PRECISION):
            box = tuple(CInterval.point(mpmath.mpf(int(c))) for c in s)
        sp = SurfacePoint(*pt, Fraction(D) if not isinstance(D, (complex, mpmath.mpc)) else D)
        out.append(CertifiedPeriodicPoint(sp, n, box, None, None, "unclassified", mp_, "exact", True))
    return out


def _newton_batch(moves, D, starts, iters=80, tol=1e-11):
    """Gauss-Newton on (h - D, f(p) - p) for an array of starts (N, 3)."""
    P = np.array(starts, dtype=complex)
    alive = np.ones(len(P), dtype=bool)
    conv = np.zeros(len(P), dtype=bool)
    eye = np.eye(3)
    with np.errstate(all="ignore"):
        for it in range(iters):
            idx = np.nonzero(alive & ~conv)[0]
            if len(idx) == 0:
                break
            x, y, z = P[idx, 0], P[idx, 1], P[idx, 2]
            (fx, fy, fz), J = ambient_jacobian_coords(moves, x, y, z)
            m = len(idx)
            Jm = np.empty((m, 3, 3), dtype=complex)
            for i in range(3):
                for j in range(3):
                    Jm[:, i, j] = np.broadcast_to(J[i][j], (m,))
            g = np.stack(_grad(x, y, z), axis=1)
            A = np.concatenate([g[:, None, :], Jm - eye], axis=1)
            r = np.stack([_h(x, y, z) - D, fx - x, fy - y, fz - z], axis=1)
            scale = 1 + np.max(np.abs(P[idx]), axis=1)
            ok = np.all(np.isfinite(r), axis=1) & np.all(np.isfinite(A.reshape(m, -1)), axis=1)
            alive[idx[~ok]] = False
            idx, A, r, scale = idx[ok], A[ok], r[ok], scale[ok]
            if len(idx) == 0:
                continue
            Ah = np.conj(np.swapaxes(A, 1, 2))
            N = Ah @ A
            N += (1e-14 * np.trace(np.abs(N), axis1=1, axis2=2))[:, None, None] * eye
            try:
                step = -np.linalg.solve(N, np.einsum("nij,nj->ni", Ah, r)[..., None])[..., 0]
            except np.linalg.LinAlgError:
                step = -np.einsum("nij,nj->ni", np.linalg.pinv(A), r)
            res = np.max(np.abs(r), axis=1)
            # a small residual alone is not enough near singular points,
            # where the system is degenerate and Newton crawls
            done = (res < tol * scale ** 3) & (np.max(np.abs(step), axis=1) < 1e-9 * scale)
            conv[idx[done]] = True
            # least-squares minimizers that are not zeros stall; drop them
            if it >= 40:
                alive[idx[~done & (res > 1e-4 * scale ** 3)]] = False
            todo = ~done
            if not np.any(todo):
                continue
            idx, step, scale = idx[todo], step[todo], scale[todo]
            norm = np.max(np.abs(step), axis=1)
            cap = 0.5 * scale
            fac = np.where(norm > cap, cap / np.maximum(norm, 1e-300), 1.0)
            P[idx] = P[idx] + step * fac[:, None]
            far = np.max(np.abs(P[idx]), axis=1) > 1e6
            alive[idx[far]] = False
    return P[conv & alive]


def _square_system(moves, D, k):
    """(h - D, (f(p) - p)_i, (f(p) - p)_j) with the component k dropped."""
    keep = [i for i in range(3) if i != k]

    def G(p):
        x, y, z = p
        img = apply_coords(moves, x, y, z)
        F = [img[i] - p[i] for i in range(3)]
        return [_h(x, y, z) - D] + [F[i] for i in keep]

    def JG(p):
        x, y, z = p
        _, J = ambient_jacobian_coords(moves, x, y, z)
        rows = [list(_grad(x, y, z))]
        for i in keep:
            rows.append([J[i][j] - (1 if i == j else 0) for j in range(3)])
        return rows

    return G, JG


def _polish(moves, D, p0, prec, steps=60):
    """Newton on the square system in big floats."""
    with mpmath.workprec(prec):
        p = [mpmath.mpc(c) for c in p0]
        Dm = _mpD(D)
        for _ in range(steps):
            g = _grad(*p)
            k = max(range(3), key=lambda i: abs(g[i]))
            G, JG = _square_system(moves, Dm, k)
            Gv = G(p)
            Jv = mpmath.matrix(JG(p))
            try:
                d = mpmath.lu_solve(Jv, mpmath.matrix([-c for c in Gv]))
            except ZeroDivisionError:
                return None
            p = [p[i] + d[i] for i in range(3)]
            scale = 1 + max(abs(c) for c in p)
            if max(abs(d[i]) for i in range(3)) < mpmath.mpf(2) ** (-prec + 8) * scale:
                break
        return p


def _eigen_data(moves, p, box, prec, real=False):
    """Restricted eigenvalues at p and enclosures of their moduli over box."""
    with mpmath.workprec(prec):
        _, J = ambient_jacobian_coords(moves, *p)
        Jm = mpmath.matrix(J)
        tr = Jm[0, 0] + Jm[1, 1] + Jm[2, 2]
        dt = mpmath.det(Jm)
        s = tr - 1
        disc = mpmath.sqrt(mpmath.mpc(s * s - 4 * dt))
        e1, e2 = (s + disc) / 2, (s - disc) / 2
        if abs(e1) < abs(e2):
            e1, e2 = e2, e1
    with precision(prec):
        if real:
            # the zero in a box symmetric about a real center is real
            box = tuple(CInterval(b.re) for b in box)
        _, JB = ambient_jacobian_coords(moves, *box)
        sB = JB[0][0] + JB[1][1] + JB[2][2] - 1
        det_sign = 1 if mpmath.re(dt) > 0 else -1
        bounds = []
        for e in (e1, e2):
            E = CInterval.point(e)
            # p(t) = t^2 - s t + det with det = +-1 exactly for these maps
            pv = E * E - sB * E + det_sign
            dp = E * 2 - sB
            num, den = pv.mag(), dp.mig()
            if den <= 0 or 4 * num >= den * den:
                bounds.append((0.0, math.inf))
                continue
            rho = 2 * num / den
            lo = max(abs(e) - rho, mpmath.mpf(0))
            hi = abs(e) + rho
            bounds.append((math.nextafter(float(lo), -math.inf), math.nextafter(float(hi), math.inf)))
        trace_bounds = (math.nextafter(float(mpmath.mpf(sB.re.a)), -math.inf),
                        math.nextafter(float(mpmath.mpf(sB.re.b)), math.inf))
        trace_imag = (float(mpmath.mpf(sB.im.a)), float(mpmath.mpf(sB.im.b)))
    return (e1, e2), tuple(bounds), det_sign, trace_bounds, trace_imag


def classify_saddle(pt: CertifiedPeriodicPoint, eps: float = SADDLE_EPS) -> str:
    """'saddle' when both modulus enclosures exclude 1; 'non_saddle' when a
    real point has real trace enclosure s with s^2 < 4 and determinant +1,
    which forces both eigenvalues onto the unit circle; 'unclassified'
    otherwise."""
    if pt.certified_by == "exact" or pt.modulus_bounds is None:
        raise SingularPoint("no eigenvalue data at a singular point")
    b1, b2 = pt.modulus_bounds
    if all(lo > 1 + eps or hi < 1 - eps for lo, hi in (b1, b2)):
        return "saddle"
    if pt.real and pt.trace_bounds is not None and pt.det_sign == 1:
        lo, hi = pt.trace_bounds
        if -2 < lo and hi < 2:
            return "non_saddle"
    return "unclassified"


def _minimal_period(moves, p, n, prec):
    with mpmath.workprec(prec):
        q = list(p)
        scale = 1 + max(abs(c) for c in p)
        for d in range(1, n + 1):
            q = list(apply_coords(moves, *q))
            if n % d == 0 and max(abs(a - b) for a, b in zip(q, p)) < mpmath.mpf(10) ** -20 * scale:
                return d
    return n


def _is_real(p, prec) -> bool:
    return all(abs(mpmath.im(c)) < mpmath.mpf(2) ** (-prec // 2) * (1 + abs(c)) for c in p)


def certify(moves, D, p, n: int, prec: int = CERT_PRECISION, base_moves=None):
    """Krawczyk certification of a polished solution; None on failure."""
    base_moves = base_moves or moves
    with mpmath.workprec(prec):
        real = _is_real(p, prec)
        if real:
            p = [mpmath.mpc(mpmath.re(c), 0) for c in p]
        g = _grad(*p)
        k = max(range(3), key=lambda i: abs(g[i]))
        scale = 1 + max(abs(c) for c in p)
        if max(abs(c) for c in g) < mpmath.mpf(10) ** -12 * scale ** 2:
            return None
    with precision(prec):
        G, JG = _square_system(moves, CInterval.point(_mpD(D)), k)
        for e in (-25, -22, -19, -16, -13, -10):
            r = mpmath.mpf(10) ** e * scale
            if krawczyk(G, JG, p, r):
                break
        else:
            return None
        box = tuple(CInterval.around(c, r) for c in p)
    eig, bounds, det_sign, trace_bounds, trace_imag = _eigen_data(moves, p, box, prec, real)
    with mpmath.workprec(prec):
        sp = SurfacePoint(*p, _mpD(D), "complex", prec)
    pt = CertifiedPeriodicPoint(sp, n, box, eig, bounds, "unclassified",
                                _minimal_period(base_moves, p, n, prec), "krawczyk", real)
    pt.det_sign = det_sign
    pt.trace_bounds = trace_bounds if (real and trace_imag == (0.0, 0.0)) else None
    pt.label = classify_saddle(pt)
    return pt


def recertify(w, pt: CertifiedPeriodicPoint, factor: float = 0.5) -> bool:
    """Rerun the Krawczyk test on the box shrunk about its center."""
    if pt.certified_by == "exact":
        return True
    moves = tuple(moves_of(w)) * pt.period
    p = [mpmath.mpmathify(c) for c in pt.point.coords()]
    r = max(b.rad() for b in pt.box) * factor
    with precision(CERT_PRECISION):
        g = _grad(*p)
        k = max(range(3), key=lambda i: abs(g[i]))
        G, JG = _square_system(moves, CInterval.point(pt.point.D), k)
        return krawczyk(G, JG, p, r)


def residual_enclosure(pt: CertifiedPeriodicPoint) -> CInterval:
    """Interval enclosure of h - D over the certification box."""
    with precision(CERT_PRECISION):
        return _h(*pt.box) - CInterval.point(_mpD(pt.point.D))


def default_starts(D, search_box=(-3.0, 3.0), grid_density: int = 60, seed: int = 0) -> np.ndarray:
    """Starting points on the surface.

    A real grid in (x, y) plus the same number of complex (x, y) drawn from
    a seeded generator over the box squared; z takes both roots of the
    defining quadratic. Real starts alone miss non-real periodic points,
    since Newton keeps real data real.
    """
    lo, hi = search_box
    g = np.linspace(lo, hi, grid_density)
    X, Y = np.meshgrid(g, g)
    x, y = X.ravel().astype(complex), Y.ravel().astype(complex)
    rng = np.random.default_rng(seed)
    k = grid_density * grid_density
    u = rng.uniform(lo, hi, (4, k))
    x = np.concatenate([x, u[0] + 1j * u[1]])
    y = np.concatenate([y, u[2] + 1j * u[3]])
    Dc = complex(D)
    disc = np.sqrt(x * x * y * y - 4 * (x * x + y * y - Dc) + 0j)
    z1, z2 = (x * y + disc) / 2, (x * y - disc) / 2
    return np.concatenate([np.stack([x, y, z1], 1), np.stack([x, y, z2], 1)])


def _dedupe(points: list[CertifiedPeriodicPoint]) -> list[CertifiedPeriodicPoint]:
    out: list[CertifiedPeriodicPoint] = []
    for p in points:
        if any(p.overlaps(q, 2.0) for q in out):
            continue
        out.append(p)
    return out


def _sort_key(p: CertifiedPeriodicPoint):
    c = [mpmath.mpmathify(v) for v in p.point.coords()]
    return tuple(float(mpmath.re(v)) for v in c) + tuple(float(mpmath.im(v)) for v in c)


def find_periodic(w, D, n: int, search_box=(-3.0, 3.0), grid_density: int = 60, tol: float = 1e-10,
                  include_singular: bool = False, extra_starts=None,
                  prec: int = CERT_PRECISION, seed: int = 0) -> list[CertifiedPeriodicPoint]:
    """Certified points with f^n(p) = p found by multistart Newton.

    Singular points of the surface (D = 0 or 4) cannot be certified by the
    Krawczyk test; with include_singular they are checked exactly in
    rational arithmetic and returned with zero-width boxes.
    """
    if n < 1:
        raise ValueError("period must be positive")
    try:
        if classify(matrix_of(w)) != "loxodromic":
            raise NotLoxodromic(f"{w} is not loxodromic")
    except TypeError:
        pass
    base = moves_of(w)
    moves = tuple(base) * n
    starts = default_starts(D, search_box, grid_density, seed)
    if extra_starts is not None and len(extra_starts):
        starts = np.concatenate([np.asarray(extra_starts, dtype=complex).reshape(-1, 3), starts])
    Dc = complex(D)
    found = _newton_batch(moves, Dc, starts, tol=max(tol * 1e-1, 1e-13))
    sing = singular_points(D)
    if sing and len(found):
        S = np.array(sing, dtype=complex)
        d = np.min(np.max(np.abs(found[:, None, :] - S[None, :, :]), axis=2), axis=1)
        found = found[d > 1e-3]
    # cluster candidates before the expensive big-float work
    cands: list[np.ndarray] = []
    reps = np.empty((0, 3), dtype=complex)
    for p in found:
        if len(reps) and np.min(np.max(np.abs(reps - p), axis=1)) <= 1e-6 * (1 + np.max(np.abs(p))):
            continue
        cands.append(p)
        reps = np.vstack([reps, p])
    out: list[CertifiedPeriodicPoint] = []
    for c in cands:
        p = _polish(moves, _mpD(D), [complex(v) for v in c], prec)
        if p is None:
            continue
        pt = certify(moves, D, p, n, prec, base)
        if pt is not None:
            out.append(pt)
    out = _dedupe(out)
    if include_singular:
        out += _exact_singular_periodic(base, D, n)
    out.sort(key=_sort_key)
    return out


@dataclass
class PeriodicComparison:
    common: list = field(default_factory=list)  # pairs (f point, g point)
    only_f: list = field(default_factory=list)
    only_g: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "common": [[a.to_json(), b.to_json()] for a, b in self.common],
            "only_f": [p.to_json() for p in self.only_f],
            "only_g": [p.to_json() for p in self.only_g],
            "counts": {"common": len(self.common), "only_f": len(self.only_f), "only_g": len(self.only_g)},
        }


def periodic_up_to(w, D, n_max: int, extra_starts=None, **kw) -> list[CertifiedPeriodicPoint]:
    """Union of find_periodic over n <= n_max, each point kept once at its
    smallest period."""
    pts: list[CertifiedPeriodicPoint] = []
    for n in range(1, n_max + 1):
        for p in find_periodic(w, D, n, extra_starts=extra_starts, **kw):
            if not any(p.overlaps(q) for q in pts):
                pts.append(p)
    return pts


def cross_certify(pt: CertifiedPeriodicPoint, g, max_period: int = 12,
                  prec: int = CERT_PRECISION) -> CertifiedPeriodicPoint | None:
    """Certify pt as a periodic point of g with some period m <= max_period.

    The g-orbit of the center is scanned for a near return; on one, the
    point is polished and certified for g^m from scratch. Success needs the
    new box to meet the old one.
    """
    if pt.certified_by == "exact":
        base = moves_of(g)
        for m in range(1, max_period + 1):
            for q in _exact_singular_periodic(base, pt.point.D, m):
                if q.point.coords() == pt.point.coords():
                    return q
        return None
    base = tuple(moves_of(g))
    D = pt.point.D
    with mpmath.workprec(prec):
        p = [mpmath.mpmathify(c) for c in pt.point.coords()]
        scale = 1 + max(abs(c) for c in p)
        q = list(p)
        for m in range(1, max_period + 1):
            try:
                q = list(apply_coords(base, *q))
            except PrecisionExhausted:
                return None
            if max(abs(c) for c in q) > 1e6 * scale:
                return None
            if max(abs(a - b) for a, b in zip(q, p)) > 1e-6 * scale:
                continue
            moves = base * m
            r = _polish(moves, D, p, prec)
            if r is None:
                continue
            cand = certify(moves, D, r, m, prec, base)
            if cand is not None and cand.overlaps(pt):
                return cand
    return None


def compare_periodic_sets(f, g, D, n_max: int = 2, tol: float = 1e-10, cross_period_max: int = 12,
                          **kw) -> PeriodicComparison:
    """Match certified periodic points of f and g by box intersection.

    Points of period <= n_max are searched for each map. A point of one map
    with no overlapping partner is then tested for periodicity under the
    other map up to cross_period_max, since a shared periodic point usually
    has different periods under the two maps.
    """
    pf = periodic_up_to(f, D, n_max, tol=tol, **kw)
    pg = periodic_up_to(g, D, n_max, tol=tol, **kw)
    rep = PeriodicComparison()
    used = set()
    for a in pf:
        match = next((j for j, b in enumerate(pg) if j not in used and a.overlaps(b)), None)
        if match is not None:
            used.add(match)
            rep.common.append((a, pg[match]))
            continue
        b = cross_certify(a, g, cross_period_max)
        if b is None:
            rep.only_f.append(a)
        else:
            rep.common.append((a, b))
    for j, b in enumerate(pg):
        if j in used or any(b.overlaps(y) for _, y in rep.common):
            continue
        a = cross_certify(b, f, cross_period_max)
        if a is None:
            rep.only_g.append(b)
        else:
            rep.common.append((a, b))
    return rep


def saddle_in_support_test(pt: CertifiedPeriodicPoint, support_sample, radius: float) -> bool:
    """True iff the point lies within radius (Euclidean, in C^3) of the sample."""
    if isinstance(support_sample, np.ndarray):
        S = np.asarray(support_sample, dtype=complex)
        if S.shape[1] == 5:
            S = S[:, 2:5]
    else:
        S = np.array([[complex(c) for c in q.coords()] for q in support_sample], dtype=complex)
    if len(S) == 0:
        raise ValueError("support sample is empty")
    c = np.array([complex(mpmath.mpmathify(v)) for v in pt.point.coords()])
    d = np.sqrt(np.sum(np.abs(S - c) ** 2, axis=1))
    return bool(np.min(d) <= radius)


@dataclass
class OrbitVerdict:
    point: list
    verdict: str  # "escaped", "bounded so far", "undecided"
    step: int | None = None

    def __str__(self):
        return f"escaped at step {self.step}" if self.verdict == "escaped" else self.verdict

    def to_json(self) -> dict:
        return {"point": self.point, "verdict": str(self)}


def unbounded_orbit_experiment(f, g, D, budget: int, escape_radius: float = DEFAULT_ESCAPE_RADIUS,
                               grid_density: int = 60, prec: int | None = None,
                               seed: int = 0) -> list[OrbitVerdict]:
    """Iterate g on each certified saddle fixed point of f and report escape.

    The working precision covers the error growth of budget steps of g, and
    each start is re-polished to that precision first.
    """
    from .surface import lambda_of

    pts = [p for p in find_periodic(f, D, 1, grid_density=grid_density, seed=seed) if p.label == "saddle"]
    gm = moves_of(g)
    fm = moves_of(f)
    lam = max(lambda_of(g), 2.0)
    work = prec or int(128 + budget * math.log2(lam))
    out = []
    for p in pts:
        c = [mpmath.mpmathify(v) for v in p.point.coords()]
        label = [[mpmath.nstr(mpmath.re(v), 15), mpmath.nstr(mpmath.im(v), 15)] for v in c]
        q = _polish(fm, _mpD(D), c, work)
        if q is None:
            out.append(OrbitVerdict(label, "undecided"))
            continue
        verdict = OrbitVerdict(label, "bounded so far")
        try:
            with mpmath.workprec(work):
                for k in range(1, budget + 1):
                    q = list(apply_coords(gm, *q))
                    if max(abs(v) for v in q) > escape_radius:
                        verdict = OrbitVerdict(label, "escaped", k)
                        break
        except PrecisionExhausted:
            verdict = OrbitVerdict(label, "undecided")
        out.append(verdict)
    return out
