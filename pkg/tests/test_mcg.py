import random

import pytest
import sympy
from hypothesis import given, strategies as st

from markovdyn.errors import NotLoxodromic
from markovdyn.mcg import (
    GENERATOR_MATRICES,
    AutomorphismWord,
    Matrix2,
    boundary_fixed_points,
    classify,
    dynamical_degree,
    elementary_factors,
    matrix_to_word,
    mobius_derivative_modulus,
    random_loxodromic_word,
    reduce,
    shares_common_iterate,
    spectral_radius,
    word_to_matrix,
)
from markovdyn.quadratic import QuadraticNumber

from strategies import loxodromic_words, words

W = AutomorphismWord.parse


def sym(m: Matrix2):
    return sympy.Matrix(m.rows())


def test_reduce_examples():
    assert reduce(["x", "x"]).is_identity()
    assert reduce(["x", "y", "y", "x"]).is_identity()
    assert reduce(["x", "y", "z"]).letters == ("x", "y", "z")


def test_unreduced_word_is_rejected():
    with pytest.raises(ValueError):
        AutomorphismWord(("x", "x"))


def test_generator_matrices():
    assert word_to_matrix(W("")) == Matrix2.identity()
    assert word_to_matrix(W("x")) == Matrix2(-1, -2, 0, 1)
    assert word_to_matrix(W("y")) == Matrix2(1, 0, -2, -1)
    assert word_to_matrix(W("z")) == Matrix2(1, 0, 0, -1)


def test_xyz_matrix_against_sympy_product():
    prod = sym(GENERATOR_MATRICES["x"]) * sym(GENERATOR_MATRICES["y"]) * sym(GENERATOR_MATRICES["z"])
    m = word_to_matrix(W("xyz"))
    assert sym(m) == prod
    assert m == Matrix2(3, -2, -2, 1) and m.trace == 4 and m.det == -1


def test_classify_examples():
    assert classify(W("x")) == "elliptic"
    assert classify(W("xy")) == "parabolic"
    assert word_to_matrix(W("xy")) == Matrix2(3, 2, -2, -1)
    assert classify(W("xyz")) == "loxodromic"
    assert classify(W("")) == "elliptic"


def test_degree_of_xyz_against_sympy():
    lam = max(sympy.Matrix([[3, -2], [-2, 1]]).eigenvals(), key=lambda e: abs(float(e)))
    assert sympy.simplify(lam - (2 + sympy.sqrt(5))) == 0
    dd = dynamical_degree(W("xyz"))
    assert dd.lambda1 == QuadraticNumber(2) + QuadraticNumber.sqrt(5)
    assert dd.value == pytest.approx(float(lam), abs=1e-14)
    assert dynamical_degree(W("xyzxyz")).lambda1 == dd.lambda1 ** 2
    assert dynamical_degree(W("")).value == 1


def test_boundary_fixed_points_of_xyz():
    bp = boundary_fixed_points(W("xyz"))
    assert bp.alpha == (QuadraticNumber(-1) + QuadraticNumber.sqrt(5)) / 2
    assert bp.omega == (QuadraticNumber(-1) - QuadraticNumber.sqrt(5)) / 2
    # both roots of t^2 + t - 1
    for t in (bp.alpha, bp.omega):
        assert t * t + t - 1 == 0


def test_boundary_fixed_points_need_loxodromic():
    with pytest.raises(NotLoxodromic):
        boundary_fixed_points(W("xy"))


def test_common_iterate_examples():
    f = W("xyz")
    r = shares_common_iterate(f, f.power(3), 4)
    assert (r.found, r.N, r.M) == (True, 3, 1)
    r = shares_common_iterate(f, f.inverse(), 2)
    assert (r.found, r.N, r.M) == (True, -1, 1)
    assert str(r) == "yes(-1,1)"


def test_reversed_word_is_the_inverse():
    # zyx is the inverse of xyz, so the two share the iterate N = -1 and the
    # same pair of boundary fixed points, swapped
    r = shares_common_iterate(W("xyz"), W("zyx"), 6)
    assert r.found and r.same_fixed_points


def test_independent_words_share_no_iterate():
    r = shares_common_iterate(W("xyz"), W("xzy"), 6)
    assert not r.found and not r.same_fixed_points


@given(words(), words())
def test_homomorphism(u, v):
    assert word_to_matrix(u * v).eq_pgl(word_to_matrix(u) @ word_to_matrix(v))


@given(words())
def test_reduce_idempotent_and_self_inverse(w):
    assert reduce(w.letters) == w
    assert reduce(w.letters + tuple(reversed(w.letters))).is_identity()


@given(words())
def test_matrices_are_congruent_to_identity_mod_2(w):
    m = word_to_matrix(w)
    assert (m.a % 2, m.b % 2, m.c % 2, m.d % 2) == (1, 0, 0, 1)
    assert abs(m.det) == 1


@given(loxodromic_words(), st.integers(1, 5))
def test_degree_power_law_and_inverse(w, k):
    lam = dynamical_degree(w).lambda1
    assert dynamical_degree(w.power(k)).lambda1 == lam ** k
    assert dynamical_degree(w.inverse()).lambda1 == lam


@given(loxodromic_words())
def test_fixed_points_swap_under_inverse(w):
    a, b = boundary_fixed_points(w), boundary_fixed_points(w.inverse())
    assert (a.alpha, a.omega) == (b.omega, b.alpha)
    assert a.alpha != a.omega
    m = word_to_matrix(w)
    prod = mobius_derivative_modulus(m, a.alpha) * mobius_derivative_modulus(m, a.omega)
    assert prod == 1


@given(loxodromic_words())
def test_degree_matches_sympy(w):
    m = word_to_matrix(w)
    ev = [complex(e) for e in sym(m).eigenvals()]
    assert float(spectral_radius(m)) == pytest.approx(max(abs(e) for e in ev), rel=1e-12)


def test_elementary_factorization_round_trip():
    rng = random.Random(5)
    for _ in range(50):
        m = word_to_matrix(random_loxodromic_word(rng))
        prod = Matrix2.identity()
        from markovdyn.mcg import ELEMENTARY_MATRICES

        for tag in elementary_factors(m):
            prod = prod @ ELEMENTARY_MATRICES[tag]
        assert prod.eq_pgl(m)
        w = matrix_to_word(m)
        assert w is not None and word_to_matrix(w).eq_pgl(m)
