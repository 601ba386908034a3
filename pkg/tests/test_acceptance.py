"""Acceptance criteria, each at its stated tolerance and time limit.

Every test prints one PASS/FAIL line. Run on its own with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import json
import math
import random
import time
from fractions import Fraction

import mpmath
import pytest

from markovdyn import boundary, charvar, green, periodic, surface, toruscover
from markovdyn.mcg import (
    AutomorphismWord,
    Matrix2,
    dynamical_degree,
    random_loxodromic_word,
    random_reduced_word,
    reduce,
    word_to_matrix,
)
from markovdyn.quadratic import QuadraticNumber

pytestmark = pytest.mark.acceptance

GOLDEN = Matrix2(2, 1, 1, 1)


@pytest.fixture
def report(request, capsys):
    def emit(ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {request.node.name}: {detail}")
        return ok

    return emit


def test_criterion_01_generator_algebra(report):
    rng = random.Random(1)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(10_000):
        u = random_reduced_word(rng, rng.randint(0, 12))
        v = random_reduced_word(rng, rng.randint(0, 12))
        # involution: w followed by its reversal cancels completely
        if not reduce(u.letters + tuple(reversed(u.letters))).is_identity():
            bad += 1
        # homomorphism in PGL2, exact integers
        if not word_to_matrix(u * v).eq_pgl(word_to_matrix(u) @ word_to_matrix(v)):
            bad += 1
    # exact action on rational points: each letter is an involution and
    # a word followed by its inverse is the identity
    for _ in range(500):
        w = random_reduced_word(rng, rng.randint(0, 12))
        p = surface.SurfacePoint.rational(Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                                          Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                                          Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        if surface.apply(w.inverse(), surface.apply(w, p)) != p:
            bad += 1
        for ch in "xyz":
            if surface.vieta(ch, surface.vieta(ch, p)) != p:
                bad += 1
    dt = time.perf_counter() - t0
    ok = report(bad == 0 and dt < 5, f"{bad} failures over 10^4 word pairs, {dt:.2f} s (limit 5 s)")
    assert ok


def test_criterion_02_dynamical_degree(report):
    dd = dynamical_degree(AutomorphismWord.parse("xyz"))
    exact = dd.lambda1 == QuadraticNumber(2) + QuadraticNumber.sqrt(5)
    float_ok = abs(dd.value - (2 + math.sqrt(5))) <= 1e-12
    rng = random.Random(2)
    bad = 0
    for _ in range(50):
        w = random_loxodromic_word(rng, 8)
        lam = dynamical_degree(w).lambda1
        for k in range(1, 6):
            if dynamical_degree(w.power(k)).lambda1 != lam ** k:
                bad += 1
    ok = report(exact and float_ok and bad == 0,
                f"exact={exact}, float error {abs(dd.value - (2 + math.sqrt(5))):.1e}, power-law failures {bad}/250")
    assert ok


def test_criterion_03_trace_identity(report):
    rng = random.Random(3)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        rho = charvar.random_sl2_pair(rng)
        if charvar.commutator_trace(rho) != charvar.kappa_at_traces(rho):
            bad += 1
    dt = time.perf_counter() - t0
    ok = report(bad == 0 and dt < 2, f"{bad} mismatches in 1000 pairs, {dt:.2f} s (limit 2 s)")
    assert ok


def test_criterion_04_equivariance(report):
    rng = random.Random(4)
    words = [random_reduced_word(rng, rng.randint(1, 6)) for _ in range(20)]
    exact_bad, worst = 0, 0.0
    for _ in range(100):
        n = rng.randint(1, 12)
        t_exact = toruscover.TorusPoint.roots(Fraction(rng.randrange(n), n), Fraction(rng.randrange(n), n))
        t_float = toruscover.TorusPoint.complex(mpmath.expjpi(2 * mpmath.mpf(rng.random())),
                                               mpmath.expjpi(2 * mpmath.mpf(rng.random())))
        for w in words:
            if toruscover.equivariance_check(w, t_exact) != 0:
                exact_bad += 1
            worst = max(worst, float(toruscover.equivariance_check(w, t_float)))
    ok = report(exact_bad == 0 and worst <= 1e-10,
                f"exact defects nonzero: {exact_bad}/2000, worst float defect {worst:.1e} (limit 1e-10)")
    assert ok


def test_criterion_05_periodic_oracle(report):
    t0 = time.perf_counter()
    counts, missed, wide = [], 0, 0
    for n in (1, 2, 3):
        exact = toruscover.periodic_points_exact(GOLDEN, n)
        counts.append(exact.count)
        assert exact.count == abs((GOLDEN.power(n) - Matrix2.identity()).det)
        boxes = periodic.find_periodic(GOLDEN, 4, n, include_singular=True)
        for t in exact.points:
            q = toruscover.eta(t, exact=False).coords()
            hits = [b for b in boxes if b.contains(q)]
            if not hits:
                missed += 1
            elif min(b.width() for b in hits) > 1e-8:
                wide += 1
    dt = time.perf_counter() - t0
    ok = report(counts == [1, 5, 16] and missed == 0 and wide == 0 and dt < 60,
                f"counts {counts}, eta-images missed {missed}, boxes wider than 1e-8 {wide}, {dt:.1f} s (limit 60 s)")
    assert ok


def _escaping_points(w, count, rng):
    pts = []
    while len(pts) < count:
        x = mpmath.mpc(rng.uniform(-4, 4), rng.uniform(-4, 4))
        y = mpmath.mpc(rng.uniform(-4, 4), rng.uniform(-4, 4))
        with mpmath.workprec(256):
            z = surface.solve_z(x, y, 0, rng.choice((1, -1)))
        p = surface.SurfacePoint.mp(x, y, z, 0, 256)
        if green.green_plus(w, p, tol=1e-6).certified_positive:
            pts.append(p)
    return pts


def test_criterion_06_green_suite(report):
    t0 = time.perf_counter()
    w = AutomorphismWord.parse("xyz")
    # (a) p-adic Green of integer points is exactly zero
    rng = random.Random(6)
    zero_bad = 0
    for _ in range(50):
        x, y = rng.randint(-20, 20), rng.randint(-20, 20)
        z = rng.randint(-20, 20)
        p = surface.SurfacePoint.rational(x, y, z)
        for prime in (2, 3, 5, 7):
            v = green.Place.padic(prime)
            if green.green_plus(w, p, v).value != 0 or green.green_minus(w, p, v).value != 0:
                zero_bad += 1
    # (b) functional equation on certified escaping points at D = 0
    pts = _escaping_points(w, 100, rng)
    worst_fe = max(green.functional_equation_residual(w, p, tol=1e-6, prec=256) for p in pts)
    # (c) closed form at D = 4
    worst_cf = 0.0
    m = word_to_matrix(w)
    for _ in range(100):
        u = mpmath.exp(mpmath.mpf(rng.uniform(-1, 1))) * mpmath.expjpi(2 * mpmath.mpf(rng.random()))
        v = mpmath.exp(mpmath.mpf(rng.uniform(-1, 1))) * mpmath.expjpi(2 * mpmath.mpf(rng.random()))
        t = toruscover.TorusPoint.complex(u, v)
        p = toruscover.eta(t, 256, exact=False)
        est = green.green_plus(w, p, tol=1e-8, prec=256).value
        worst_cf = max(worst_cf, abs(est - float(toruscover.closed_form_green(m, t, 256))))
    dt = time.perf_counter() - t0
    ok = report(zero_bad == 0 and worst_fe <= 1e-5 and worst_cf <= 1e-6 and dt < 120,
                f"(a) nonzero p-adic values {zero_bad}; (b) worst residual {worst_fe:.1e} (limit 1e-5); "
                f"(c) worst closed-form error {worst_cf:.1e} (limit 1e-6); {dt:.1f} s (limit 120 s)")
    assert ok


def _exactly_periodic(w, p, n_max=12):
    q = p
    for n in range(1, n_max + 1):
        q = surface.apply(w, q)
        if q == p:
            return n
    return None


def test_criterion_07_heights(report):
    cases = [
        ("xyz", (2, 2, 2)),
        ("xyz", (-1, -1, -1)),
        ("xyz", (0, 0, -2)),
        ("xyzy", (0, 0, -2)),
        ("xyzy", (-1, -1, -1)),
        ("xzyxy", (1, -1, -2)),
    ]
    worst, lines = 0.0, []
    for word, c in cases:
        w = AutomorphismWord.parse(word)
        p = surface.SurfacePoint.rational(*c)
        assert _exactly_periodic(w, p) is not None, (word, c)
        h = green.height(w, p).value
        worst = max(worst, h)
        lines.append(f"{word}@{c}: {h:.1e}")
    # a regular rational periodic point off D = 4
    w = AutomorphismWord.parse("xyzy")
    p = surface.SurfacePoint.rational(0, 1, 0, 1)
    assert _exactly_periodic(w, p) == 1
    h = green.height(w, p).value
    worst = max(worst, h)
    lines.append(f"xyzy@(0,1,0),D=1: {h:.1e}")
    h222 = green.height(AutomorphismWord.parse("xyz"), surface.SurfacePoint.rational(2, 2, 2)).value
    ok = report(worst <= 2e-6 and h222 <= 2e-6, f"worst height {worst:.1e} (limit 2e-6); " + "; ".join(lines))
    assert ok


def test_criterion_08_boundary(report):
    X = boundary.base_completion()
    base_ok = [list(r) for r in X.intersection] == [[-1, 1, 1], [1, -1, 1], [1, 1, -1]]
    sig_bad = 0
    rng = random.Random(8)
    Y = X
    for _ in range(20):
        Y = boundary.blow_up(Y, rng.randrange(len(Y)))
        pos, neg, zero = boundary.signature(Y.intersection)
        if (pos, neg, zero) != (1, len(Y) - 1, 0):
            sig_bad += 1
    words = ["xyz", "xyzy", "xzyxy", "xyxz", "xzyzxy"]
    fails = []
    for s in words:
        w = AutomorphismWord.parse(s)
        rep = boundary.divisor_report(w)
        Z = rep.adapted.completion
        lam = float(rep.lambda1)
        checks = {
            "perron": abs(rep.perron_value - lam) <= 1e-9,
            "theta_nonneg": all(c >= 0 for c in rep.theta_plus.coefficients),
            "theta_sq": abs(float(boundary.intersection_number(Z, rep.theta_plus, rep.theta_plus))) <= 1e-8,
            "d_minus_residual": float(boundary.eigen_residual(w, Z, rep.d_minus)) <= 1e-8,
            "d_minus_theta_minus": abs(float(boundary.intersection_number(Z, rep.d_minus, rep.theta_minus))) <= 1e-8,
            "columns": _columns_vanish(rep),
            "stable": rep.stable,
        }
        fails += [f"{s}:{k}" for k, v in checks.items() if not v]
    ok = report(base_ok and sig_bad == 0 and not fails,
                f"base matrix {'ok' if base_ok else 'wrong'}, signature failures {sig_bad}/20, "
                f"word check failures {fails or 'none'}")
    assert ok


def _columns_vanish(rep) -> bool:
    X = rep.adapted.completion
    r = len(X)
    i, j = rep.adapted.p_plus % r, (rep.adapted.p_plus + 1) % r
    P = rep.contracting_pullback
    return all(P.column_is_zero(k) for k in range(r) if k not in (i, j))


def test_criterion_09_equidistribution(report):
    t0 = time.perf_counter()
    chars = toruscover.box_characters(10)
    fracs, values, counts = [], set(), []
    for n in (2, 4, 6, 8):
        rep = toruscover.equidistribution_test(GOLDEN, n, chars)
        fracs.append(rep.fraction_trivial)
        counts.append(rep.count)
        values |= set(rep.averages.values())
    monotone = all(a >= b for a, b in zip(fracs, fracs[1:]))
    reached = all(f == 0 for f, c in zip(fracs, counts) if c > 441)
    dt = time.perf_counter() - t0
    ok = report(values <= {0, 1} and monotone and reached and dt < 30,
                f"fractions {[str(f) for f in fracs]} for |det| {counts}, averages in {sorted(values)}, {dt:.2f} s")
    assert ok


def test_criterion_10_saddles_in_support(report):
    t0 = time.perf_counter()
    sample = toruscover.lebesgue_sample_array(10, 100_000)
    far, total = 0, 0
    for n in (1, 2, 3):
        for p in periodic.find_periodic(GOLDEN, 4, n):
            if p.label != "saddle":
                continue
            total += 1
            if not periodic.saddle_in_support_test(p, sample, 0.05):
                far += 1
    dt = time.perf_counter() - t0
    ok = report(total > 0 and far == 0 and dt < 60,
                f"{total} certified saddles, {far} farther than 0.05 from the sample, {dt:.1f} s (limit 60 s)")
    assert ok


def test_criterion_11_shared_periodic_points(report, tmp_path):
    f = AutomorphismWord.parse("xyzy")
    square = periodic.compare_periodic_sets(f, f.power(2), 1, 1)
    A, B = GOLDEN, Matrix2(1, 1, 1, 2)
    at4 = periodic.compare_periodic_sets(A, B, 4, 1)
    at0 = periodic.compare_periodic_sets(A, B, 0, 1)
    summary = {
        "f_vs_f_squared": {"D": 1, "word": str(f), **square.to_json()["counts"]},
        "monomial_pair_D4": {"matrices": [[2, 1, 1, 1], [1, 1, 1, 2]], **at4.to_json()["counts"]},
        "monomial_pair_D0": {"matrices": [[2, 1, 1, 1], [1, 1, 1, 2]], **at0.to_json()["counts"]},
    }
    (tmp_path / "shared_periodic_points.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    disjoint = not at0.common and not any(a.overlaps(b) for a in at0.only_f for b in at0.only_g)
    ok = report(
        not square.only_f and square.common and at4.common and not at4.only_f and not at4.only_g
        and at0.only_f and at0.only_g and disjoint,
        json.dumps(summary, sort_keys=True),
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
