from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from oracles import bessel_zero_mp, encloses
from posicert.errors import DomainError
from posicert.interval import PI, Interval
from posicert.special import (
    MIN_TOL,
    BesselOrder,
    bessel_derivative,
    bessel_series,
    first_zero,
    verify_increasing_on,
    verify_positive_on,
)

J0_ZERO = 2.404825557695773  # nearest float, for a point evaluation


def test_series_at_origin():
    assert bessel_series(0, Interval(0.0)).contains(1.0)
    assert bessel_series(1, Interval(0.0)).contains(0.0)


def test_series_at_first_zero_is_tight():
    got = bessel_series(0, Interval(J0_ZERO))
    assert got.contains(0.0) or abs(got.mid()) < 1e-15
    assert got.width() < 1e-10


def test_series_outside_domain():
    with pytest.raises(DomainError):
        bessel_series(0, Interval(29.0, 31.0))
    with pytest.raises(DomainError):
        bessel_series(0, Interval(-1.0, 0.5))


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=6), st.floats(min_value=0.0, max_value=30.0))
def test_series_contains_mpmath_at_points(n, x):
    assert encloses(bessel_series(n, Interval(x)), mpmath.besselj(n, mpf(x)))


@settings(max_examples=80, deadline=None)
@given(
    st.integers(min_value=0, max_value=3),
    st.floats(min_value=0.0, max_value=29.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_series_contains_mpmath_over_intervals(n, start, width, t):
    X = Interval(start, min(start + width, 30.0))
    x = X.lo + (X.hi - X.lo) * t
    assert encloses(bessel_series(n, X), mpmath.besselj(n, mpf(x)))


def test_derivative_identity():
    x = Interval(1.3)
    assert encloses(bessel_derivative(0, x), -mpmath.besselj(1, mpf(1.3)))
    assert encloses(bessel_derivative(2, x), mpmath.besselj(2, mpf(1.3), derivative=1))


def _riemann_enclosure(n: int, x: float, cells: int = 10_000) -> Interval:
    """Midpoint sum of (1/pi) int_0^pi cos(x sin t - n t) dt with a Lipschitz error bound.

    The integrand has derivative bounded by |x| + n, so each midpoint value
    is within (|x| + n) h / 2 of every value on its cell.  numpy's cos and
    the summation add far less than the 1e-12 slack below.
    """
    h = np.pi / cells
    t = (np.arange(cells) + 0.5) * h
    total = float(np.sum(np.cos(x * np.sin(t) - n * t))) * h / np.pi
    bound = (abs(x) + n) * h / 2 + 1e-12
    return Interval(total - bound, total + bound)


@pytest.mark.parametrize("n", [0, 1])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 3.0])
def test_series_agrees_with_quadrature(n, x):
    series = bessel_series(n, Interval(x))
    quad = _riemann_enclosure(n, x)
    assert series.lo <= quad.hi and quad.lo <= series.hi


def test_positivity_certificates():
    assert verify_positive_on(0, Interval(0.0, 1.0), 16)
    assert verify_positive_on(0, Interval(0.0, 0.0), 1)
    assert verify_positive_on(1, Interval(0.0, 1.0), 16)
    assert verify_increasing_on(1, Interval(0.0, 1.0), 16)


def test_positivity_fails_across_a_zero():
    assert not verify_positive_on(0, Interval(2.3, 2.5), 64)


@pytest.mark.parametrize("order", [0, 1, Fraction(3, 2)])
def test_first_zero_contains_reference(order):
    enc = first_zero(order, 1e-10)
    assert encloses(enc.zero, bessel_zero_mp(order))
    assert enc.zero.width() <= 1e-10
    assert enc.signs_certified()
    assert enc.slope is not None and enc.slope.hi < 0.0
    assert enc.window.lo <= enc.zero.lo and enc.zero.hi <= enc.window.hi


def test_table_rows():
    # the j_0 row ends 4.2e-12 above the zero, so the bracket must be narrower than that
    assert first_zero(0, 1e-12).zero.subset(Interval("2.4048255576", "2.4048255577"))
    assert first_zero(1).zero.subset(Interval("3.8317059702", "3.8317059703"))
    assert first_zero(1.5).zero.subset(Interval("4.4934094579", "4.4934094580"))


def test_half_order_is_pi():
    enc = first_zero(0.5)
    assert enc.exact and enc.zero == PI
    assert enc.zero.subset(Interval("3.1415926535", "3.1415926536"))
    assert enc.signs_certified()


def test_zero_ordering():
    assert first_zero(0).zero.hi < first_zero(1).zero.lo


@pytest.mark.parametrize("order", [0, 1, 1.5])
def test_shrinking_tol_nests(order):
    previous = None
    for tol in (1e-4, 1e-7, 1e-10, 1e-13):
        z = first_zero(order, tol).zero
        assert z.width() <= tol
        if previous is not None:
            assert z.subset(previous) and z.width() <= previous.width()
        previous = z


def test_tol_floor():
    first_zero(0, MIN_TOL)
    with pytest.raises(DomainError):
        first_zero(0, MIN_TOL / 2)


@pytest.mark.parametrize("order", [2, 0.3, -1, "5/2"])
def test_unsupported_orders(order):
    with pytest.raises(DomainError):
        first_zero(order)


def test_order_parsing():
    assert BesselOrder.of("1/2").value == Fraction(1, 2)
    assert BesselOrder.of(1.5).twice == 3
    assert str(BesselOrder.of(3)) == "3"
    assert not BesselOrder.of(0.5).is_integer
