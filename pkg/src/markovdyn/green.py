"""Local Green functions, escape classification and heights.

G+(p) = lim lambda1^-n log+ max(|x_n|, |y_n|, |z_n|) along the forward
orbit, evaluated at the archimedean place with big floats or at a p-adic
place with tracked valuations. Convergence is judged by the Cauchy gap
between consecutive estimates.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath

from .errors import NotLoxodromic, NotRational, PrecisionExhausted
from .mcg import ELEMENTARY_MATRICES, AutomorphismWord, Matrix2, _positive_factors, classify, matrix_to_word
from .padic import PAdic, rational_valuation
from .surface import (
    DEFAULT_ESCAPE_RADIUS,
    SurfacePoint,
    apply_coords,
    inverse_map,
    lambda_of,
    matrix_of,
    moves_of,
    precision_for,
)

BASE_PRECISION = 256
PADIC_DIGITS = 200
MAX_PRECISION = 1 << 16


@dataclass(frozen=True)
class Place:
    kind: str = "archimedean"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("archimedean", "p_adic"):
            raise ValueError(f"unknown place kind {self.kind!r}")
        if self.kind == "p_adic":
            if self.p is None or self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p ** 0.5) + 1)):
                raise ValueError(f"{self.p} is not a prime")

    @classmethod
    def archimedean(cls) -> "Place":
        return cls("archimedean", None)

    @classmethod
    def padic(cls, p: int) -> "Place":
        return cls("p_adic", int(p))

    @classmethod
    def parse(cls, text: str) -> "Place":
        t = text.strip().lower()
        if t in ("inf", "infinity", "archimedean", "arch", "oo"):
            return cls.archimedean()
        if t.startswith("p="):
            t = t[2:]
        return cls.padic(int(t))

    @property
    def is_archimedean(self) -> bool:
        return self.kind == "archimedean"

    def sort_key(self):
        return (0, 0) if self.is_archimedean else (1, self.p)

    def __str__(self):
        return "inf" if self.is_archimedean else f"p={self.p}"


@dataclass(frozen=True)
class GreenEstimate:
    value: float
    n_used: int
    cauchy_gap: float
    certified_positive: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "n_used": self.n_used,
            "cauchy_gap": self.cauchy_gap,
            "certified_positive": self.certified_positive,
        }


@dataclass(frozen=True)
class HeightEstimate:
    value: float
    per_place: dict = field(default_factory=dict)
    places_enumerated: tuple = ()


def _is_rational(c) -> bool:
    return isinstance(c, (Fraction, int))


def _require_rational(p: SurfacePoint):
    vals = (p.x, p.y, p.z, p.D)
    if not all(_is_rational(c) for c in vals):
        raise NotRational("p-adic places need rational coordinates and parameter")
    return tuple(Fraction(c) for c in vals)


def local_norm(p: SurfacePoint, v: Place):
    """max(|x|_v, |y|_v, |z|_v); exact Fraction at p-adic places."""
    if v.is_archimedean:
        if all(_is_rational(c) for c in p.coords()):
            return max(abs(Fraction(c)) for c in p.coords())
        return max(abs(c) for c in p.coords())
    x, y, z, _ = _require_rational(p)
    best = Fraction(0)
    for c in (x, y, z):
        if c != 0:
            best = max(best, Fraction(v.p) ** (-int(rational_valuation(c, v.p))))
    return best


def _log_plus(t) -> mpmath.mpf:
    if t == 0:
        return mpmath.mpf(0)
    lt = mpmath.log(t)
    return lt if lt > 0 else mpmath.mpf(0)


def _check_loxodromic(w):
    if classify(matrix_of(w)) != "loxodromic":
        raise NotLoxodromic(f"{w} is not loxodromic")


def _padic_log_plus(coords, p: int) -> float:
    worst = None
    for c in coords:
        if c.is_zero:
            if c.v < 0:
                raise PrecisionExhausted("p-adic cancellation below the tracked precision")
            continue
        worst = c.v if worst is None else min(worst, c.v)
    if worst is None or worst >= 0:
        return 0.0
    return -worst


def _estimate(sequence, lam, tol, n_max, trace=None):
    """Run est_n = lam^-n * L_n and stop after two consecutive gaps < tol."""
    prev = None
    small = 0
    value, gap, n_used = mpmath.mpf(0), mpmath.inf, 0
    for n, L in enumerate(sequence):
        est = L / lam ** n
        if trace is not None:
            trace.append(est)
        if prev is not None:
            gap = abs(est - prev)
            small = small + 1 if gap < tol else 0
        value, n_used = est, n
        if small >= 2 or n >= n_max:
            break
        prev = est
    return value, n_used, gap


def green_plus(w, p: SurfacePoint, v: Place | None = None, tol: float = 1e-6, n_max: int = 60,
               prec: int | None = None) -> GreenEstimate:
    v = v or Place.archimedean()
    _check_loxodromic(w)
    moves = moves_of(w)
    lam_f = lambda_of(w)
    if prec is None:
        prec = max(BASE_PRECISION, precision_for(n_max, lam_f))
    if not v.is_archimedean:
        x, y, z, D = _require_rational(p)
        if all(rational_valuation(c, v.p) >= 0 for c in (x, y, z, D) if c != 0):
            # every iterate is a p-adic integer, so log+ vanishes identically
            return GreenEstimate(0.0, 1, 0.0, False)
        coords = [PAdic.from_rational(c, v.p, PADIC_DIGITS) for c in (x, y, z)]
        logp = mpmath.log(v.p)

        def seq():
            nonlocal coords
            yield _padic_log_plus(coords, v.p) * logp
            while True:
                coords = list(apply_coords(moves, *coords))
                yield _padic_log_plus(coords, v.p) * logp

        with mpmath.workprec(prec):
            value, n_used, gap = _estimate(seq(), matrix_lambda_mp(w, prec), tol, n_max)
    else:
        moves, p, post = _stable_form(w, moves, p)
        value, n_used, gap = _archimedean_estimate(w, moves, p, tol, n_max, prec, post)
    value_f, gap_f = float(value), float(gap) if gap != mpmath.inf else float("inf")
    return GreenEstimate(value_f, n_used, gap_f, value_f > gap_f)


_SUBTRACTIVE = {"x": (1, 2, 0), "y": (0, 2, 1), "z": (0, 1, 2), "T": (1, 2, 0), "U": (0, 1, 2)}


def _apply_tracked(moves, x, y, z):
    """apply_coords that also returns the bits lost to cancellation, measured
    against the sup norm of the point after each move."""
    lost = 0.0
    for tag in reversed(moves):
        pre = None
        if tag in _SUBTRACTIVE:
            i, j, k = _SUBTRACTIVE[tag]
            c = (x, y, z)
            pre = abs(c[i] * c[j]) + abs(c[k])
        x, y, z = apply_coords((tag,), x, y, z)
        if pre is not None and pre > 0:
            scale = max(abs(x), abs(y), abs(z), 1)
            if pre > scale:
                lost += float(mpmath.log(pre / scale, 2))
    return (x, y, z), lost


def _stable_form(w, moves, p):
    """Swap a mixed-sign matrix f for its conjugate g = z f z when g has
    entries of one sign: f^n(p) = z(g^n(z p)), and g factors without
    cancellation. Returns (moves, start point, moves applied before measuring)."""
    if isinstance(w, AutomorphismWord) or not isinstance(w, Matrix2) or matrix_to_word(w) is not None:
        return moves, p, ()
    if _positive_factors(w) is not None:
        return moves, p, ()
    zm = ELEMENTARY_MATRICES["z"]
    pos = _positive_factors(zm @ w @ zm)
    if pos is None:
        return moves, p, ()
    q = p.to_mp(p.precision_bits or BASE_PRECISION)
    with mpmath.workprec(p.precision_bits or BASE_PRECISION):
        q = q.with_coords(*apply_coords(("z",), *q.coords()))
    return tuple(pos), q, ("z",)


def _archimedean_run(w, moves, p, tol, n_max, prec, trace=None, post=()):
    """Returns (value, n_used, gap, bits_lost)."""
    lost = 0.0
    with mpmath.workprec(prec):
        lam = matrix_lambda_mp(w, prec)
        cur = p.to_mp(prec).coords()

        def measure():
            c = apply_coords(post, *cur) if post else cur
            return _log_plus(max(abs(t) for t in c))

        def seq():
            nonlocal cur, lost
            yield measure()
            while True:
                cur, dl = _apply_tracked(moves, *cur)
                lost += dl
                yield measure()

        return _estimate(seq(), lam, tol, n_max, trace) + (lost,)


def _archimedean_estimate(w, moves, p, tol, n_max, prec, post=()):
    """Raise the working precision until the bits lost to cancellation leave
    a safety margin and two precisions agree term by term to tol/10."""
    margin = 64
    while prec <= MAX_PRECISION:
        t_lo: list = []
        t_hi: list = []
        lo = _archimedean_run(w, moves, p, tol, n_max, prec, t_lo, post)
        hi = _archimedean_run(w, moves, p, tol, n_max, 2 * prec, t_hi, post)
        need = hi[3] + margin
        agree = len(t_lo) == len(t_hi) and all(abs(a - b) <= tol / 10 for a, b in zip(t_lo, t_hi))
        if agree and lo[3] + margin <= prec:
            return hi[:3]
        prec = max(4 * prec, int(need) + 64)
    raise PrecisionExhausted(f"cancellation needs more than {MAX_PRECISION} bits")


def matrix_lambda_mp(w, prec: int):
    from .mcg import spectral_radius

    return spectral_radius(matrix_of(w)).to_mpf(prec)


def green_minus(w, p: SurfacePoint, v: Place | None = None, tol: float = 1e-6, n_max: int = 60,
                prec: int | None = None) -> GreenEstimate:
    return green_plus(inverse_map(w), p, v, tol, n_max, prec)


def functional_equation_residual(w, p: SurfacePoint, v: Place | None = None, tol: float = 1e-6,
                                 n_max: int = 60, prec: int | None = None) -> float:
    """|G+(f(p)) - lambda1 G+(p)|."""
    from .surface import apply

    g0 = green_plus(w, p, v, tol, n_max, prec)
    q = p if (v is not None and not v.is_archimedean) else p.to_mp(prec or BASE_PRECISION)
    g1 = green_plus(w, apply(w, q), v, tol, n_max, prec)
    return abs(g1.value - lambda_of(w) * g0.value)


def bounded_orbit_test(w, p: SurfacePoint, v: Place | None = None, tol: float = 1e-6, n_max: int = 60,
                       escape_radius: float = DEFAULT_ESCAPE_RADIUS) -> str:
    v = v or Place.archimedean()
    est = green_plus(w, p, v, tol, n_max)
    if est.certified_positive:
        return "escaping"
    stayed = True
    if v.is_archimedean:
        moves = moves_of(w)
        with mpmath.workprec(BASE_PRECISION):
            cur = p.to_mp(BASE_PRECISION).coords()
            for _ in range(n_max):
                cur = apply_coords(moves, *cur)
                if max(abs(c) for c in cur) > escape_radius:
                    stayed = False
                    break
    if stayed and est.value < tol:
        return "bounded"
    return "undecided"


def height_places(p: SurfacePoint) -> list[Place]:
    vals = _require_rational(p)
    primes = set()
    for c in vals:
        d = c.denominator
        q = 2
        while q * q <= d:
            while d % q == 0:
                primes.add(q)
                d //= q
            q += 1
        if d > 1:
            primes.add(d)
    return [Place.archimedean()] + [Place.padic(q) for q in sorted(primes)]


def height(w, p: SurfacePoint, tol: float = 1e-6, n_max: int = 60) -> HeightEstimate:
    """Sum over places of (G+ + G-)/2; places outside the list contribute 0."""
    _check_loxodromic(w)
    places = height_places(p)
    per = {}
    for v in sorted(places, key=Place.sort_key):
        gp = green_plus(w, p, v, tol, n_max)
        gm = green_minus(w, p, v, tol, n_max)
        per[v] = (gp.value + gm.value) / 2
    total = 0.0
    for v in sorted(per, key=Place.sort_key):
        total += per[v]
    return HeightEstimate(total, per, tuple(places))


def naive_weil_height(p: SurfacePoint):
    """1 + log max(|X|, |Y|, |Z|, |W|) for coprime integers with (x:y:z:1) = (X:Y:Z:W)."""
    coords = p.coords()
    if not all(_is_rational(c) for c in coords):
        raise NotRational("naive height needs rational coordinates")
    coords = [Fraction(c) for c in coords]
    L = 1
    for c in coords:
        L = L * c.denominator // gcd(L, c.denominator)
    ints = [int(c * L) for c in coords] + [L]
    g = 0
    for k in ints:
        g = gcd(g, k)
    ints = [abs(k) // g for k in ints]
    return 1 + mpmath.log(max(ints))


def green_csv(rows) -> str:
    """rows: iterables (point_id, place, G_plus, G_minus, n_used, gap)."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["point_id", "place", "G_plus", "G_minus", "n_used", "gap"])
    for r in rows:
        pid, place, gp, gm, n, gap = r
        wr.writerow([pid, str(place), repr(float(gp)), repr(float(gm)), int(n), repr(float(gap))])
    return buf.getvalue()
