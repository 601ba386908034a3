import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from markovdyn.boundary import (
    BASE_VERTICES,
    FareyVertex,
    adapted_completion,
    adjacent,
    base_completion,
    blow_up,
    d_minus,
    divisor_report,
    eigen_residual,
    exact_det,
    intersection_number,
    mobius_vertex_action,
    pullback_matrix,
    rank,
    signature,
    stability_check,
    theta_minus,
    theta_plus,
    toric_pullback,
    total_transform,
)
from markovdyn.errors import BudgetExceeded, NotAdjacent, NotLoxodromic
from markovdyn.mcg import AutomorphismWord, Matrix2, boundary_fixed_points, spectral_radius
from markovdyn.surface import inverse_map, matrix_of
from strategies import loxodromic_words

XYZ = AutomorphismWord.parse("xyz")


def hexagon():
    X = base_completion()
    for c in (0, 2, 4):
        X = blow_up(X, c)
    return X


def random_completion(rng, k):
    X = base_completion()
    for _ in range(k):
        X = blow_up(X, rng.randrange(len(X)))
    return X


def test_base_completion():
    X = base_completion()
    assert X.intersection == ((-1, 1, 1), (1, -1, 1), (1, 1, -1))
    assert exact_det(X.intersection) == 4
    assert signature(X.intersection) == (1, 2, 0)
    assert all(adjacent(a, b) for a, b in X.corners())
    assert [str(v) for v in X.vertices] == ["inf", "0", "-1"]


def test_sympy_agrees_on_base_eigenvalues():
    ev = sympy.Matrix(base_completion().intersection).eigenvals()
    assert ev == {1: 1, -2: 2}


def test_hexagon():
    X = hexagon()
    assert len(X) == 6
    diag = {str(v): X.intersection[i][i] for i, v in enumerate(X.vertices)}
    for v in BASE_VERTICES:
        assert diag.pop(str(v)) == -3
    assert set(diag.values()) == {-1}
    assert signature(X.intersection) == (1, 5, 0)


def test_mediant_of_zero_and_infinity():
    X = blow_up(base_completion(), 0)
    assert X.vertices[1] == FareyVertex(1, 1)
    assert blow_up(base_completion(), (FareyVertex(0, 1), FareyVertex.infinity())).vertices == X.vertices


def test_blow_up_requires_adjacent_corner():
    X = hexagon()
    with pytest.raises(NotAdjacent):
        blow_up(X, (FareyVertex(0, 1), FareyVertex.infinity()))


@settings(max_examples=30)
@given(st.integers(0, 2 ** 31), st.integers(1, 10))
def test_blow_up_invariants(seed, k):
    rng = random.Random(seed)
    X = base_completion()
    d = exact_det(X.intersection)
    for _ in range(k):
        X = blow_up(X, rng.randrange(len(X)))
        d2 = exact_det(X.intersection)
        assert d2 == -d
        d = d2
        assert all(adjacent(a, b) for a, b in X.corners())
    assert signature(X.intersection) == (1, len(X) - 1, 0)
    Q = X.intersection
    r = len(X)
    for i in range(r):
        for j in range(r):
            if i != j:
                assert Q[i][j] == (1 if (j - i) % r in (1, r - 1) else 0)


def test_mobius_examples():
    v = FareyVertex(0, 1)
    assert mobius_vertex_action(Matrix2.identity(), v) == v
    assert mobius_vertex_action(Matrix2(3, -2, -2, 1), v) == FareyVertex.rational(-2)


@given(st.integers(0, 2 ** 31), st.integers(-20, 20), st.integers(1, 20))
def test_mobius_primitive(seed, p, q):
    rng = random.Random(seed)
    m = Matrix2.identity()
    for _ in range(6):
        m = m @ rng.choice([Matrix2(1, 1, 0, 1), Matrix2(1, 0, 1, 1), Matrix2(0, 1, 1, 0)])
    v = FareyVertex(p, q)
    u = mobius_vertex_action(m, v)
    assert np.gcd(u.p, u.q) == 1


def test_intersection_examples():
    X = base_completion()
    E1, E2 = [1, 0, 0], [0, 1, 0]
    assert intersection_number(X, E1, E1) == -1
    assert intersection_number(X, E1, E2) == 1


@given(st.integers(0, 2 ** 31))
def test_intersection_bilinear_symmetric(seed):
    rng = random.Random(seed)
    X = random_completion(rng, rng.randint(0, 6))
    r = len(X)
    a, b, c = ([Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(r)] for _ in range(3))
    s = Fraction(rng.randint(-4, 4))
    assert intersection_number(X, a, b) == intersection_number(X, b, a)
    ab = [x + s * y for x, y in zip(a, b)]
    assert intersection_number(X, ab, c) == intersection_number(X, a, c) + s * intersection_number(X, b, c)


@given(st.integers(0, 2 ** 31))
def test_projection_formula(seed):
    rng = random.Random(seed)
    X = random_completion(rng, rng.randint(0, 5))
    r = len(X)
    D1 = [rng.randint(-5, 5) for _ in range(r)]
    D2 = [rng.randint(-5, 5) for _ in range(r)]
    corner = rng.randrange(r)
    Y = blow_up(X, corner)
    P1, P2 = total_transform(X, corner, D1), total_transform(X, corner, D2)
    assert intersection_number(Y, P1, P2) == intersection_number(X, D1, D2)
    # alpha . pi^* beta = pi_* alpha . beta, pi_* drops the exceptional curve
    alpha = [rng.randint(-5, 5) for _ in range(r + 1)]
    pushed = alpha[:corner + 1] + alpha[corner + 2:]
    assert intersection_number(Y, alpha, P2) == intersection_number(X, pushed, D2)


def test_projection_formula_on_hexagon():
    X = hexagon()
    # total transform of the hyperplane triangle: every exceptional curve gets 2
    Hs = [1, 1, 1]
    Y = base_completion()
    for c in (0, 2, 4):
        Hs = total_transform(Y, c, Hs)
        Y = blow_up(Y, c)
    assert Y == X
    assert Hs == [1 if v in BASE_VERTICES else 2 for v in X.vertices]
    assert intersection_number(X, Hs, Hs) == intersection_number(base_completion(), [1, 1, 1], [1, 1, 1]) == 3


def _oracle_fan_pullback(M, rays):
    """ord along E_v of f^*D_w = phi_w(M v), phi_w the piecewise linear
    function with phi_w(w) = 1 and 0 on the other rays."""
    r = len(rays)
    P = [[0] * r for _ in range(r)]
    for vi, v in enumerate(rays):
        u = sympy.Matrix([[M.a, M.b], [M.c, M.d]]) * sympy.Matrix(v)
        for i in range(r):
            B = sympy.Matrix([list(rays[i]), list(rays[(i + 1) % r])]).T
            coef = B.solve(u)
            if all(c >= 0 for c in coef):
                P[vi][i] += int(coef[0])
                P[vi][(i + 1) % r] += int(coef[1])
                break
    return P


FAN4 = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def test_toric_pullback_four_ray_fan():
    P = toric_pullback(Matrix2(2, 1, 1, 1), FAN4)
    assert P[0][0] == 2 and P[0][1] == 1
    assert P == _oracle_fan_pullback(Matrix2(2, 1, 1, 1), FAN4)


@given(st.sampled_from([Matrix2(2, 1, 1, 1), Matrix2(1, 1, 1, 2), Matrix2(3, 2, 1, 1),
                        Matrix2(0, 1, 1, 0), Matrix2(1, 2, 0, 1), Matrix2(-1, 1, 0, 1)]))
def test_toric_pullback_against_oracle(M):
    fan = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)]
    assert toric_pullback(M, fan) == _oracle_fan_pullback(M, fan)


def test_identity_pullback_and_stability():
    X = hexagon()
    P = pullback_matrix(Matrix2.identity(), X)
    assert P.as_lists() == np.eye(6, dtype=int).tolist()
    assert stability_check(Matrix2.identity(), X, 4)


def test_adapted_completion_xyz():
    ad = adapted_completion(XYZ)
    X = ad.completion
    bfp = boundary_fixed_points(matrix_of(XYZ))
    assert ad.p_plus != ad.p_minus
    assert X.corner_of(bfp.omega) == ad.p_plus
    assert X.corner_of(bfp.alpha) == ad.p_minus
    assert stability_check(XYZ, X, 4)


def test_inverse_swaps_corners():
    ad = adapted_completion(XYZ)
    inv = adapted_completion(inverse_map(XYZ), X=ad.completion)
    assert inv.completion == ad.completion
    assert (inv.p_plus, inv.p_minus) == (ad.p_minus, ad.p_plus)


@pytest.mark.parametrize("word", ["xzxyx", "zyxyzyz"])
def test_base_triangle_unstable(word):
    w = AutomorphismWord.parse(word)
    assert not stability_check(w, base_completion(), 4)
    assert stability_check(w, adapted_completion(w).completion, 4)


def test_adapted_errors():
    with pytest.raises(NotLoxodromic):
        adapted_completion(AutomorphismWord.parse("xy"))
    with pytest.raises(BudgetExceeded):
        adapted_completion(AutomorphismWord.parse("xzxyx"), max_blowups=0)


@settings(max_examples=15, deadline=None)
@given(loxodromic_words(6))
def test_eigen_divisors(w):
    ad = adapted_completion(w)
    X = ad.completion
    lam = spectral_radius(matrix_of(w))
    P = pullback_matrix(w, X)
    assert abs(P.spectral_radius() - float(lam)) < 1e-9
    PN = pullback_matrix(matrix_of(w).power(ad.contracting_power), X)
    r = len(X)
    keep = {ad.p_plus % r, (ad.p_plus + 1) % r}
    for j in range(r):
        if j not in keep:
            assert PN.column_is_zero(j)
    tp = theta_plus(w, X)
    assert all(c >= 0 for c in tp.coefficients)
    assert P.apply(list(tp.coefficients)) == [lam * c for c in tp.coefficients]
    tm = theta_minus(w, X)
    assert intersection_number(X, tp, tm) == 1
    dm = d_minus(w, X, ad.p_plus)
    assert eigen_residual(w, X, dm) == 0
    assert intersection_number(X, dm, tm) == 0
    others = [[int(i == j) for j in range(r)] for i in range(r)]
    basis = [list(tp.coefficients), list(dm.coefficients)] + [
        others[i] for i in range(r) if i not in keep]
    assert rank(basis) == r


def test_divisor_report_isotropy():
    rep = divisor_report(XYZ)
    X = rep.adapted.completion
    assert abs(float(intersection_number(X, rep.theta_plus, rep.theta_plus))) <= 1e-8
    assert abs(float(intersection_number(X, rep.theta_minus, rep.theta_minus))) <= 1e-8
    assert rep.stable
    assert rep.to_json()["contracting_pullback"]["word"]


def test_csv_export():
    P = pullback_matrix(XYZ, adapted_completion(XYZ).completion)
    lines = P.to_csv().splitlines()
    assert lines[0].split(",")[0] == "source"
    assert len(lines) == len(P.vertices) + 1
