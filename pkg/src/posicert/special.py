"""Bessel functions of the first kind and their first positive zeros.

J_n is evaluated from its ascending power series

    J_n(x) = sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)

in interval arithmetic.  Once the ratio of consecutive terms is below 1/2 on
the whole argument interval, the remaining tail is bounded by twice the
first omitted term.

Zero enclosures come with a certificate: the function enclosures at both
bracket ends have opposite signs, the function is proved monotone on the
window holding the bracket, and the function is proved positive from 0 up
to that window, so the bracket holds the first positive zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, PrecisionError
from .interval import PI, Interval, cos, sin

SERIES_DOMAIN = Interval(0.0, 30.0)
SCAN_STEP = 1.0 / 64.0
MAX_BISECTIONS = 200
MIN_TOL = 1e-14
_MAX_TERMS = 400
_POINT_TAIL = Fraction(1, 2**80)
# below this the outward-rounded terms stall at subnormal size
_ABS_TAIL = 1e-300


@dataclass(frozen=True, slots=True)
class BesselOrder:
    """Integer or half-integer order, stored as twice its value."""

    twice: int

    def __post_init__(self):
        if self.twice < 0:
            raise DomainError("Bessel orders must be nonnegative")

    @classmethod
    def of(cls, value) -> "BesselOrder":
        if isinstance(value, BesselOrder):
            return value
        q = Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
        doubled = q * 2
        if doubled.denominator != 1:
            raise DomainError(f"order {value} is neither an integer nor a half-integer")
        return cls(int(doubled))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


@dataclass(frozen=True)
class ZeroEnclosure:
    """First positive zero of J_order together with its sign certificate.

    ``f_lo`` and ``f_hi`` enclose the bracketing function (named by
    ``function``) at ``zero.lo`` and ``zero.hi``.  ``slope`` encloses its
    derivative over ``window``, a superset of ``zero`` on which the function
    is therefore monotone.  ``positive_on`` is the range certified free of
    zeros before the window.
    """

    order: BesselOrder
    zero: Interval
    f_lo: Interval
    f_hi: Interval
    function: str
    exact: bool = False
    window: Interval | None = None
    slope: Interval | None = None
    positive_on: Interval | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def signs_certified(self) -> bool:
        """Endpoint enclosures exclude zero and have opposite signs."""
        return (self.f_lo.lo > 0.0 and self.f_hi.hi < 0.0) or (
            self.f_lo.hi < 0.0 and self.f_hi.lo > 0.0
        )


def _check_series_domain(x: Interval) -> None:
    if not x.subset(SERIES_DOMAIN):
        raise DomainError(f"Bessel series tail bound only established on [0, 30], got {x}")


def _series_point(n: int, x: float) -> Interval:
    """J_n at a float x: exact rational partial sum plus a bounded tail."""
    half = Fraction(x) / 2
    quarter_sq = half * half
    term = half**n / math.factorial(n)
    if term == 0:
        return Interval(0.0)
    total = term
    k = 0
    while True:
        term = -term * quarter_sq / ((k + 1) * (k + n + 1))
        k += 1
        # ratio of the next pair, decreasing in k, bounds every later ratio
        if quarter_sq < Fraction((k + 1) * (k + n + 1), 2) and abs(term) < _POINT_TAIL:
            tail = 2 * abs(term)
            return Interval(total - tail, total + tail)
        total += term
        if k > _MAX_TERMS:
            raise PrecisionError("Bessel series did not settle")


def bessel_series(n: int, x) -> Interval:
    """Enclosure of J_n over the interval x, for integer n >= 0 and x in [0, 30]."""
    n = int(n)
    if n < 0:
        raise DomainError("bessel_series needs an integer order >= 0")
    x = Interval.coerce(x)
    _check_series_domain(x)
    if x.is_point:
        return _series_point(n, x.lo)
    half = x * 0.5
    quarter_sq = half.square()
    # leading term (x/2)^n / n!
    term = half**n / Interval(math.factorial(n)) if n else Interval(1.0)
    if term.hi == 0.0:
        return term
    h = quarter_sq.hi
    total = term
    peak = term.mag()
    k = 0
    while True:
        term = -(term * quarter_sq) / float((k + 1) * (k + n + 1))
        k += 1
        mag = term.mag()
        peak = max(peak, mag)
        # ratio of the next pair, decreasing in k, bounds every later ratio
        if h / float((k + 1) * (k + n + 1)) < 0.5 and mag <= max(1e-17 * peak, _ABS_TAIL):
            tail = math.nextafter(2.0 * mag, math.inf)
            return total + Interval(-tail, tail)
        total = total + term
        if k > _MAX_TERMS:
            raise PrecisionError("Bessel series did not settle")


def bessel_derivative(n: int, x) -> Interval:
    """Enclosure of J_n' via J_0' = -J_1 and J_n' = (J_(n-1) - J_(n+1)) / 2."""
    n = int(n)
    if n == 0:
        return -bessel_series(1, x)
    return (bessel_series(n - 1, x) - bessel_series(n + 1, x)) * 0.5


def _cells(span: Interval, count: int) -> list[Interval]:
    count = max(int(count), 1)
    lo, hi = span.lo, span.hi
    step = (hi - lo) / count
    cuts = [lo] + [min(max(lo + i * step, lo), hi) for i in range(1, count)] + [hi]
    for i in range(1, len(cuts)):
        cuts[i] = max(cuts[i], cuts[i - 1])
    return [Interval(cuts[i], cuts[i + 1]) for i in range(count)]


def verify_positive_on(n: int, span, subdivisions: int = 16) -> bool:
    """True only if J_n > 0 is certified on span (excluding x = 0 when n >= 1).

    For n >= 1, J_n(0) = 0; a cell starting at 0 is accepted when J_n' is
    certified positive on it, which forces J_n > 0 on the rest of the cell.
    """
    span = Interval.coerce(span)
    _check_series_domain(span)
    for cell in _cells(span, subdivisions):
        if n >= 1 and cell.lo == 0.0:
            if cell.hi == 0.0:
                continue
            if not bessel_derivative(n, cell).lo > 0.0:
                return False
            continue
        if not bessel_series(n, cell).lo > 0.0:
            return False
    return True


def verify_increasing_on(n: int, span, subdivisions: int = 16) -> bool:
    """True only if J_n' > 0 is certified on every cell of span."""
    span = Interval.coerce(span)
    return all(bessel_derivative(n, c).lo > 0.0 for c in _cells(span, subdivisions))


def _positive_adaptive(n: int, cell: Interval, depth: int = 6) -> bool:
    if bessel_series(n, cell).lo > 0.0:
        return True
    if depth == 0:
        return False
    mid = cell.mid()
    if not cell.lo < mid < cell.hi:
        return False
    return _positive_adaptive(n, Interval(cell.lo, mid), depth - 1) and _positive_adaptive(
        n, Interval(mid, cell.hi), depth - 1
    )


def _bisect(fn, a: float, b: float, fa: Interval, fb: Interval, tol: float):
    """Shrink a bracket with fa > 0 > fb until b - a <= tol."""
    for _ in range(MAX_BISECTIONS):
        if b - a <= tol:
            return a, b, fa, fb
        mid = 0.5 * a + 0.5 * b
        if not a < mid < b:
            break
        fm = fn(mid)
        if fm.lo > 0.0:
            a, fa = mid, fm
        elif fm.hi < 0.0:
            b, fb = mid, fm
        else:
            raise PrecisionError(
                f"function enclosure at {mid!r} contains zero; cannot refine below width {b - a:.3e}"
            )
    if b - a <= tol:
        return a, b, fa, fb
    raise PrecisionError(f"bisection stalled at width {b - a:.3e} above tol {tol:.3e}")


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not tol >= MIN_TOL:
        raise DomainError(f"tol must be >= {MIN_TOL}, got {tol}")
    return tol


def _integer_zero(n: int, tol: float) -> ZeroEnclosure:
    order = BesselOrder(2 * n)
    if not verify_positive_on(n, Interval(0.0, 1.0), 16):
        raise PrecisionError(f"could not certify J_{n} > 0 on (0, 1]")
    covered = 1.0
    start = 1.0
    for i in range(1, 30 * 128):
        lo = start + (i - 1) * SCAN_STEP / 2
        window = Interval(lo, lo + SCAN_STEP)
        if window.hi > SERIES_DOMAIN.hi:
            break
        if _positive_adaptive(n, window):
            if window.lo <= covered:
                covered = max(covered, window.hi)
            continue
        f_a = bessel_series(n, window.lo)
        f_b = bessel_series(n, window.hi)
        if f_a.lo > 0.0 and f_b.hi < 0.0:
            slope = bessel_derivative(n, window)
            if slope.hi < 0.0 and window.lo <= covered:
                a, b, fa, fb = _bisect(
                    lambda t: bessel_series(n, t), window.lo, window.hi, f_a, f_b, tol
                )
                return ZeroEnclosure(
                    order=order,
                    zero=Interval(a, b),
                    f_lo=fa,
                    f_hi=fb,
                    function=f"J_{n}",
                    window=window,
                    slope=slope,
                    positive_on=Interval(0.0, window.lo),
                    notes=(
                        f"J_{n} > 0 certified on (0, {window.lo!r}] by series enclosures",
                        f"J_{n}' < 0 certified on the window, so the zero there is unique",
                    ),
                )
        if f_a.hi < 0.0:
            break
    raise PrecisionError(f"no certified sign change of J_{n} found")


def _half_integer_zero(twice: int, tol: float) -> ZeroEnclosure:
    order = BesselOrder(twice)
    if twice == 1:
        # J_(1/2)(x) = sqrt(2/(pi x)) sin x
        return ZeroEnclosure(
            order=order,
            zero=PI,
            f_lo=sin(PI.lo),
            f_hi=sin(PI.hi),
            function="sin x",
            exact=True,
            notes=("J_(1/2)(x) = sqrt(2/(pi x)) sin x, first positive zero pi",),
        )
    if twice == 3:
        # J_(3/2)(x) = sqrt(2/(pi x)) (sin x - x cos x) / x
        def g(t: float) -> Interval:
            ti = Interval(t)
            return sin(ti) - ti * cos(ti)

        a, b = PI.hi, (PI * 1.5).lo
        window = Interval(a, b)
        slope = window * sin(window)
        if not slope.hi < 0.0:
            raise PrecisionError("could not certify monotonicity of sin x - x cos x")
        lo, hi, fa, fb = _bisect(g, a, b, g(a), g(b), tol)
        return ZeroEnclosure(
            order=order,
            zero=Interval(lo, hi),
            f_lo=fa,
            f_hi=fb,
            function="sin x - x cos x",
            window=window,
            slope=slope,
            positive_on=Interval(0.0, PI.hi),
            notes=(
                "zeros of J_(3/2) on x > 0 are the zeros of g(x) = sin x - x cos x",
                "g(0) = 0 and g' = x sin x > 0 on (0, pi), so g > 0 on (0, pi]",
                "g' = x sin x < 0 on the window, so the zero there is unique",
            ),
        )
    raise DomainError(f"zero finding supports orders 0, 1/2, 1, 3/2; got {order}")


def first_zero(order, tol: float = 1e-12) -> ZeroEnclosure:
    """Certified enclosure of the first positive zero of J_order."""
    order = BesselOrder.of(order)
    tol = _check_tol(tol)
    if order.twice in (0, 2):
        return _integer_zero(order.twice // 2, tol)
    return _half_integer_zero(order.twice, tol)
