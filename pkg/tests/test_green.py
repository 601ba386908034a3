import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from markovdyn.errors import NotLoxodromic, NotRational
from markovdyn.green import (
    Place,
    bounded_orbit_test,
    functional_equation_residual,
    green_csv,
    green_minus,
    green_plus,
    height,
    local_norm,
    naive_weil_height,
)
from markovdyn.mcg import AutomorphismWord
from markovdyn.surface import SurfacePoint, inverse_map, map_power
from markovdyn.toruscover import TorusPoint, eta

XYZ = AutomorphismWord.parse("xyz")
P333 = SurfacePoint.rational(3, 3, 3, 0)
# G+(3,3,3) for xyz at D=0: exact integer iteration to n=11, then a
# 200-bit logarithm divided by lambda^11
G333 = 1.04826945152355


def test_local_norm_examples():
    assert local_norm(P333, Place.archimedean()) == 3
    assert local_norm(P333, Place.padic(3)) == Fraction(1, 3)
    p = SurfacePoint.rational(Fraction(1, 2), 3, 3)
    assert local_norm(p, Place.padic(2)) == 2


def test_local_norm_needs_rationals():
    p = SurfacePoint.mp(mpmath.sqrt(2), 0, 0)
    with pytest.raises(NotRational):
        local_norm(p, Place.padic(5))


def test_place_validation():
    with pytest.raises(ValueError):
        Place.padic(4)
    assert Place.parse("inf").is_archimedean
    assert Place.parse("7") == Place.padic(7)


def test_integer_point_padic_zero():
    for prime in (2, 3, 5):
        est = green_plus(XYZ, P333, Place.padic(prime))
        assert est.value == 0 and est.n_used == 1


def test_fixed_point_is_zero():
    p = SurfacePoint.rational(0, 0, 0, 0)
    assert green_plus(XYZ, p).value == 0
    assert functional_equation_residual(XYZ, p) == 0


def test_green_plus_333_against_frozen_value():
    est = green_plus(XYZ, P333, tol=1e-6)
    assert est.cauchy_gap < 1e-6 and est.n_used <= 40
    assert est.certified_positive
    assert abs(est.value - G333) < 1e-6


def test_green_minus_is_green_plus_of_inverse():
    a = green_minus(XYZ, P333)
    b = green_plus(inverse_map(XYZ), P333)
    assert a == b
    assert abs(a.value - G333) < 1e-6  # xyz is conjugate to its inverse via a reversal


def test_functional_equation_333():
    assert functional_equation_residual(XYZ, P333, tol=1e-6) <= 1e-5


def test_bounded_orbit_classification():
    assert bounded_orbit_test(XYZ, P333) == "escaping"
    with mpmath.workprec(300):
        t = TorusPoint.complex(mpmath.expjpi(mpmath.mpf("0.3")), mpmath.expjpi(mpmath.mpf("0.71")))
        p = eta(t, 300, exact=False)
    assert bounded_orbit_test(XYZ, p) == "bounded"


def test_d4_point_has_zero_green():
    t = TorusPoint.complex(mpmath.expjpi(mpmath.mpf("0.2")), mpmath.expjpi(mpmath.mpf("1.1")))
    p = eta(t, exact=False)
    assert green_plus(XYZ, p).value < 1e-6
    assert green_minus(XYZ, p).value < 1e-6


def test_height_examples():
    assert height(XYZ, SurfacePoint.rational(0, 0, 0, 0)).value == 0
    h = height(XYZ, P333)
    assert list(h.per_place) == [Place.archimedean()]
    gp, gm = green_plus(XYZ, P333).value, green_minus(XYZ, P333).value
    assert h.value == pytest.approx((gp + gm) / 2, abs=1e-12)


def test_height_enumerates_denominator_primes():
    p = SurfacePoint.rational(Fraction(1, 6), Fraction(5, 2), 1)
    h = height(XYZ, p)
    assert h.places_enumerated == (Place.archimedean(), Place.padic(2), Place.padic(3))
    assert h.value == pytest.approx(sum(h.per_place.values()))
    assert all(c >= 0 for c in h.per_place.values())


def test_naive_weil_height():
    assert naive_weil_height(SurfacePoint.rational(0, 0, 0)) == 1
    assert abs(naive_weil_height(P333) - (1 + math.log(3))) < 1e-15
    assert abs(naive_weil_height(SurfacePoint.rational(Fraction(1, 2), 0, 0)) - (1 + math.log(2))) < 1e-15


def test_errors():
    with pytest.raises(NotLoxodromic):
        green_plus(AutomorphismWord.parse("xy"), P333)
    with pytest.raises(NotRational):
        height(XYZ, SurfacePoint.mp(0.5, 0, 0))


def test_scaling_law_under_powers():
    for k in (2, 3):
        est = green_plus(map_power(XYZ, k), P333, tol=1e-6)
        assert abs(est.value - G333) <= 2e-6


@settings(max_examples=20)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_green_nonnegative_and_integral_at_p(x, y, z):
    p = SurfacePoint.rational(x, y, z)
    assert green_plus(XYZ, p, n_max=30).value >= 0
    assert green_plus(XYZ, p, Place.padic(7)).value == 0


def test_csv_header():
    out = green_csv([(0, Place.archimedean(), 1.0, 0.5, 7, 1e-9)])
    assert out.splitlines()[0] == "point_id,place,G_plus,G_minus,n_used,gap"
    assert out.splitlines()[1].startswith("0,inf,1.0,0.5,7,")
