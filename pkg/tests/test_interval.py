import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from mpmath import mpf

from oracles import encloses, fuzz_arithmetic, fuzz_functions
from posicert import interval as ia
from posicert.errors import DomainError
from posicert.interval import PI, Interval

finite = st.floats(min_value=-1e30, max_value=1e30, allow_nan=False, allow_infinity=False)
small = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)
positive = st.floats(min_value=1e-30, max_value=1e30, allow_nan=False)


@st.composite
def nested(draw, values=finite):
    """(X, X') with X inside X', and a point inside X."""
    a, b, c, d = sorted(draw(st.lists(values, min_size=4, max_size=4)))
    inner = Interval(b, c)
    t = draw(st.floats(min_value=0.0, max_value=1.0))
    x = min(max(b + (c - b) * t, b), c)
    return inner, Interval(a, d), x


# -- construction -------------------------------------------------------------


def test_decimal_strings_are_rounded_outward():
    tenth = Interval("0.1")
    assert tenth.lo < tenth.hi
    assert Fraction(tenth.lo) < Fraction(1, 10) < Fraction(tenth.hi)
    assert Interval("0.5").is_point


def test_invalid_intervals_rejected():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(math.nan)
    with pytest.raises(ValueError):
        Interval(math.inf, math.inf)


def test_hex_round_trip():
    iv = Interval("0.1") * PI
    assert Interval.from_hex(iv.to_hex()) == iv


# -- arithmetic examples ------------------------------------------------------


def test_add_of_exact_endpoints():
    got = Interval(1, 2) + Interval(3, 4)
    assert got.lo <= 4.0 and got.hi >= 6.0
    assert got.width() <= 2.0 + 4 * math.ulp(6.0)


def test_mul_mixed_signs():
    got = Interval(-1, 2) * Interval(3, 4)
    assert got.lo <= -4.0 and got.hi >= 8.0


def test_division_by_interval_with_zero():
    with pytest.raises(DomainError):
        Interval(1.0) / Interval(0.0, 1.0)


def test_sqrt_of_exact_square():
    got = ia.sqrt(Interval(4.0))
    assert got.contains(2.0)
    assert got.lo >= math.nextafter(2.0, 0) and got.hi <= math.nextafter(2.0, 3)


def test_pi_matches_ten_digit_table():
    assert 3.1415926535 <= PI.lo and PI.hi <= 3.1415926536
    assert encloses(PI, mpmath.pi)


def test_cube_root_of_two():
    got = ia.pow_real(Interval(2.0), Interval(Fraction(1, 3)))
    assert got.contains(1.2599210498948732)
    assert Fraction(got.lo) ** 3 < 2 < Fraction(got.hi) ** 3


def test_pow_real_with_integer_exponent_is_pow_int():
    x = Interval(0.3, 0.7)
    assert ia.pow_real(x, Interval(3)) == ia.pow_int(x, 3)


def test_domain_errors():
    for fn, arg in [(ia.sqrt, Interval(-1.0, 1.0)), (ia.log, Interval(0.0, 1.0)), (ia.gamma, Interval(-0.5))]:
        with pytest.raises(DomainError):
            fn(arg)
    with pytest.raises(DomainError):
        ia.sin(Interval(2e4))
    with pytest.raises(DomainError):
        ia.root_n(Interval(-1.0), 2)


# -- gamma --------------------------------------------------------------------


def test_gamma_two_is_tight():
    got = ia.gamma(Interval(2.0))
    assert got.contains(1.0) and got.width() < 1e-12


def test_gamma_half_is_sqrt_pi():
    assert encloses(ia.gamma(Interval(0.5)), mpmath.sqrt(mpmath.pi))


def test_ball_volume_three_from_gamma():
    got = ia.pow_real(PI, Interval(1.5)) / ia.gamma(Interval(2.5))
    assert 4.1887902047 <= got.lo and got.hi <= 4.1887902048


@pytest.mark.parametrize("n", range(1, 13))
def test_gamma_factorials(n):
    assert ia.gamma(Interval(n)).contains(math.factorial(n - 1))


@pytest.mark.parametrize("k", range(0, 9))
def test_gamma_half_integers(k):
    closed = mpf(math.factorial(2 * k)) * mpmath.sqrt(mpmath.pi) / (mpf(4) ** k * math.factorial(k))
    assert encloses(ia.gamma(Interval(Fraction(2 * k + 1, 2))), closed)


def test_gamma_interval_across_minimum():
    got = ia.gamma(Interval(1.2, 1.8))
    assert encloses(got, mpmath.gamma(mpf("1.4616321449683623")))
    assert got.lo <= 0.8856031944108887


# -- width control --------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_relative_width_of_point_enclosures(x):
    X = Interval(x)
    results = [ia.sqrt(X), ia.log(X), ia.pow_real(X, Interval(0.3)), ia.root_n(X, 3), ia.pow_int(X, 5)]
    if x < 700:
        results.append(ia.exp(X))
    for r in results:
        if r.mag() > 0.0:
            assert r.width() < 1e-12 * r.mag(), r


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=60.0))
def test_gamma_relative_width(x):
    # ln Gamma grows, so the absolute error of its exponent grows too
    g = ia.gamma(Interval(x))
    assert g.width() < 1e-12 * g.mag()


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_trig_width_relative_to_magnitude(x):
    for r in (ia.sin(Interval(x)), ia.cos(Interval(x))):
        # near a zero the width is absolute, of the order of ulp(x)
        assert r.width() < 1e-12 * max(r.mag(), 1e-3)


# -- properties ------------------------------------------------------------------

ops = st.sampled_from(["add", "sub", "mul", "div"])


@settings(max_examples=400, deadline=None)
@given(ops, nested(), nested())
def test_monotone_inclusion_arithmetic(op, xs, ys):
    (x_in, x_out, _), (y_in, y_out, _) = xs, ys
    assume(not (op == "div" and y_out.contains(0.0)))
    assert ia.arith(op, x_in, y_in).subset(ia.arith(op, x_out, y_out))


@settings(max_examples=400, deadline=None)
@given(ops, nested(), nested())
def test_point_containment_arithmetic(op, xs, ys):
    (X, _, x), (Y, _, y) = xs, ys
    assume(not (op == "div" and Y.contains(0.0)))
    a, b = Fraction(x), Fraction(y)
    exact = {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b if b else None}[op]
    assert encloses(ia.arith(op, X, Y), exact)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["exp", "sin", "cos"]), nested(small))
def test_monotone_inclusion_functions(fn, xs):
    inner, outer, _ = xs
    assert ia.elementary(fn, inner).subset(ia.elementary(fn, outer))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["sqrt", "ln", "gamma"]), nested(st.floats(min_value=1e-6, max_value=40.0)))
def test_monotone_inclusion_positive_functions(fn, xs):
    inner, outer, _ = xs
    assert ia.elementary(fn, inner).subset(ia.elementary(fn, outer))


@settings(max_examples=300, deadline=None)
@given(nested(small))
def test_sin_cos_contain_mpmath(xs):
    X, _, x = xs
    assert encloses(ia.sin(X), mpmath.sin(mpf(x)))
    assert encloses(ia.cos(X), mpmath.cos(mpf(x)))


@settings(max_examples=300, deadline=None)
@given(positive, st.integers(min_value=-6, max_value=6))
def test_pow_int_contains_exact(x, n):
    got = ia.pow_int(Interval(x), n)
    assert encloses(got, Fraction(x) ** n)


def test_isum_and_hull():
    total = ia.isum([Interval("0.1")] * 10)
    assert total.contains(1.0)
    assert ia.hull(Interval(1.0), Interval(3.0, 4.0)) == Interval(1.0, 4.0)


@pytest.mark.parametrize(
    "value,digits,lo,hi",
    [(0.1, 3, "0.1", "0.101"), (2.0 / 3.0, 4, "0.6666", "0.6667"), (-1.5, 2, "-1.5", "-1.5")],
)
def test_outward_decimal_rendering(value, digits, lo, hi):
    assert Fraction(ia.format_lo(value, digits)) == Fraction(lo)
    assert Fraction(ia.format_hi(value, digits)) == Fraction(hi)


@settings(max_examples=300, deadline=None)
@given(finite, st.integers(min_value=1, max_value=17))
def test_rendering_never_crosses_the_value(x, digits):
    assert Fraction(ia.format_lo(x, digits)) <= Fraction(x) <= Fraction(ia.format_hi(x, digits))


def test_fuzz_sample():
    """A reduced containment run; the full 10^6 run is part of the acceptance suite."""
    assert fuzz_arithmetic(20_000, seed=11) == []
    assert fuzz_functions(4_500, seed=12) == []
