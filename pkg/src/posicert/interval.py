"""Outward-rounded interval arithmetic on binary64 endpoints.

The arithmetic primitives (+, -, *, /, sqrt) compute each endpoint in
round-to-nearest, then use an error-free transformation (TwoSum, Dekker's
product) to see on which side of the exact result it fell, and step one
float outward with ``math.nextafter`` only when needed.  The endpoints are
therefore the directed roundings of the exact results: no control over the
FPU rounding mode, safe from several threads, exact results stay exact.

Elementary functions (exp, log, sin, cos) and gamma are built from Taylor or
Stirling series whose truncation errors are bounded explicitly, so they never
depend on the accuracy of the platform libm.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from numbers import Rational

from .errors import DomainError

INF = math.inf
MAX_FLOAT = sys.float_info.max
MIN_SUBNORMAL = 5e-324

_nextafter = math.nextafter


def next_down(x: float) -> float:
    return _nextafter(x, -INF)


def next_up(x: float) -> float:
    return _nextafter(x, INF)


# ---------------------------------------------------------------------------
# directed endpoint primitives
#
# Each primitive returns the round-down or round-up of the exact result.  The
# round-to-nearest value is corrected by one ulp only when an error-free
# transformation shows it lies on the wrong side, so the endpoints are
# monotone in the operands and exact results are never widened.

_SPLITTER = 134217729.0  # 2^27 + 1
_SAFE_BIG = 2.0**995
_SAFE_SMALL = 2.0**-960


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _two_prod_err(a: float, b: float, p: float) -> float:
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dekker_safe(a: float, b: float, p: float) -> bool:
    return abs(a) < _SAFE_BIG and abs(b) < _SAFE_BIG and _SAFE_SMALL < abs(p) < _SAFE_BIG


def _overflowed(s: float, up: bool) -> float:
    # a finite operation that rounded to +-inf
    if s > 0.0:
        return INF if up else MAX_FLOAT
    return -MAX_FLOAT if up else -INF


def _add_lo(a, b):
    s = a + b
    if s - s != 0.0:  # infinite
        return s if (a - a != 0.0 or b - b != 0.0) else _overflowed(s, False)
    return _nextafter(s, -INF) if _two_sum_err(a, b, s) < 0.0 else s


def _add_hi(a, b):
    s = a + b
    if s - s != 0.0:
        return s if (a - a != 0.0 or b - b != 0.0) else _overflowed(s, True)
    return _nextafter(s, INF) if _two_sum_err(a, b, s) > 0.0 else s


def _mul_slow(a: float, b: float, up: bool) -> float:
    if a - a != 0.0 or b - b != 0.0:  # an infinite operand, the other nonzero
        return a * b
    lo, hi = fraction_bounds(Fraction(a) * Fraction(b))
    return hi if up else lo


def _mul_lo(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if not _dekker_safe(a, b, p):
        return _mul_slow(a, b, False)
    return _nextafter(p, -INF) if _two_prod_err(a, b, p) < 0.0 else p


def _mul_hi(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if not _dekker_safe(a, b, p):
        return _mul_slow(a, b, True)
    return _nextafter(p, INF) if _two_prod_err(a, b, p) > 0.0 else p


def _div_side(a: float, b: float, q: float) -> float:
    """Sign of a/b - q, computed exactly; 0.0 when q is exact."""
    p = q * b
    if not _dekker_safe(q, b, p) or not abs(a) < _SAFE_BIG:
        exact = Fraction(a) / Fraction(b) - Fraction(q)
        return float((exact > 0) - (exact < 0))
    # q b = p + e exactly and a - p is exact (Sterbenz), so r = a - q b
    diff = a - p
    e = _two_prod_err(q, b, p)
    if diff == e:
        return 0.0
    r_positive = diff > e
    return 1.0 if r_positive == (b > 0.0) else -1.0


def _div_infinite(a: float, b: float, up: bool) -> float:
    # a or b infinite, a != 0, b != 0
    a_inf, b_inf = a - a != 0.0, b - b != 0.0
    positive = (a > 0.0) == (b > 0.0)
    if a_inf and b_inf:  # any magnitude is a limit value
        if positive:
            return INF if up else 0.0
        return 0.0 if up else -INF
    if a_inf:
        return a / b
    return 0.0


def _div_lo(a, b):
    if a == 0.0:
        return 0.0
    if a - a != 0.0 or b - b != 0.0:
        return _div_infinite(a, b, False)
    q = a / b
    if q - q != 0.0 or abs(q) < _SAFE_SMALL:
        return fraction_bounds(Fraction(a) / Fraction(b))[0]
    return _nextafter(q, -INF) if _div_side(a, b, q) < 0.0 else q


def _div_hi(a, b):
    if a == 0.0:
        return 0.0
    if a - a != 0.0 or b - b != 0.0:
        return _div_infinite(a, b, True)
    q = a / b
    if q - q != 0.0 or abs(q) < _SAFE_SMALL:
        return fraction_bounds(Fraction(a) / Fraction(b))[1]
    return _nextafter(q, INF) if _div_side(a, b, q) > 0.0 else q


def _pow_pos_lo(a: float, n: int) -> float:
    """Lower bound of a**n for a >= 0 and n >= 0 by repeated squaring."""
    result, base = 1.0, a
    while n:
        if n & 1:
            result = _mul_lo(result, base)
        n >>= 1
        if n:
            base = _mul_lo(base, base)
    return result


def _pow_pos_hi(a: float, n: int) -> float:
    result, base = 1.0, a
    while n:
        if n & 1:
            result = _mul_hi(result, base)
        n >>= 1
        if n:
            base = _mul_hi(base, base)
    return result


# ---------------------------------------------------------------------------
# conversions


def fraction_bounds(q: Rational) -> tuple[float, float]:
    """Tightest pair of floats (lo, hi) with lo <= q <= hi."""
    q = Fraction(q)
    try:
        f = float(q)  # correctly rounded
    except OverflowError:
        return (MAX_FLOAT, INF) if q > 0 else (-INF, -MAX_FLOAT)
    if f == q:
        return f, f
    if f < q:
        return f, next_up(f)
    return next_down(f), f


def parse_exact(text: str) -> Fraction | float:
    """Parse a decimal or hexadecimal float literal without rounding."""
    s = text.strip()
    if s.lower().lstrip("+-").startswith("0x"):
        return float.fromhex(s)
    if s.lower().lstrip("+-") in ("inf", "infinity"):
        return float(s)
    try:
        return Fraction(s)
    except ValueError as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def _bounds_of(value) -> tuple[float, float]:
    if isinstance(value, float):
        if value != value:
            raise ValueError("NaN is not a valid interval endpoint")
        return value, value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        f = float(value) if abs(value) <= 2**53 else None
        return (f, f) if f is not None else fraction_bounds(Fraction(value))
    if isinstance(value, (Fraction, Rational)):
        return fraction_bounds(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            return _bounds_of(float(value))
        return fraction_bounds(Fraction(value))
    if isinstance(value, str):
        return _bounds_of(parse_exact(value))
    if isinstance(value, Interval):
        return value.lo, value.hi
    if hasattr(value, "__float__"):  # numpy scalars
        return _bounds_of(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an interval")


# ---------------------------------------------------------------------------
# the interval type


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with binary64 endpoints.

    The constructor accepts floats, ints, Fractions, Decimals or numeric
    strings; non-representable endpoints are rounded outward.  An infinite
    endpoint means the value overflowed: such an interval is still a valid
    enclosure but certifies nothing finite (see ``is_finite``).
    """

    lo: float
    hi: float

    def __init__(self, lo, hi=None):
        lo_pair = _bounds_of(lo)
        hi_pair = lo_pair if hi is None else _bounds_of(hi)
        a, b = lo_pair[0], hi_pair[1]
        if not a <= b:
            raise ValueError(f"empty interval [{a!r}, {b!r}]")
        if a == INF or b == -INF:
            raise ValueError("an interval cannot lie entirely at infinity")
        object.__setattr__(self, "lo", a)
        object.__setattr__(self, "hi", b)

    # -- construction helpers -------------------------------------------
    @classmethod
    def coerce(cls, value) -> "Interval":
        if type(value) is cls:
            return value
        if type(value) is float:
            return _make(value, value)
        return cls(value)

    @classmethod
    def from_hex(cls, pair) -> "Interval":
        lo, hi = pair
        return cls(float.fromhex(lo), float.fromhex(hi))

    def to_hex(self) -> list[str]:
        return [self.lo.hex(), self.hi.hex()]

    # -- predicates and measures ------------------------------------------
    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_finite(self) -> bool:
        """False when an endpoint overflowed; such results certify nothing."""
        return -INF < self.lo and self.hi < INF

    def width(self) -> float:
        """Upper bound on hi - lo."""
        return _add_hi(self.hi, -self.lo)

    def mid(self) -> float:
        """A float inside the interval, near its centre (not rigorous)."""
        if self.lo == -INF or self.hi == INF:
            return 0.0 if self.lo <= 0.0 <= self.hi else (self.lo if self.hi == INF else self.hi)
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    def mag(self) -> float:
        """max |x| over the interval."""
        return max(-self.lo, self.hi)

    def mig(self) -> float:
        """min |x| over the interval."""
        if self.lo > 0.0:
            return self.lo
        if self.hi < 0.0:
            return -self.hi
        return 0.0

    def contains(self, value) -> bool:
        """True if ``value`` (a number or an interval) lies inside."""
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, str):
            value = parse_exact(value)
        if isinstance(value, Decimal):
            value = Fraction(value)
        return self.lo <= value <= self.hi

    __contains__ = contains

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other) -> "Interval":
        other = Interval.coerce(other)
        return _make(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other) -> "Interval":
        other = Interval.coerce(other)
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("intervals do not intersect")
        return _make(lo, hi)

    # -- arithmetic --------------------------------------------------------
    def __neg__(self) -> "Interval":
        return _make(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __abs__(self) -> "Interval":
        return _make(self.mig(), self.mag())

    def __add__(self, other):
        if type(other) is not Interval:
            try:
                other = Interval.coerce(other)
            except TypeError:
                return NotImplemented
        return _make(_add_lo(self.lo, other.lo), _add_hi(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not Interval:
            try:
                other = Interval.coerce(other)
            except TypeError:
                return NotImplemented
        return _make(_add_lo(self.lo, -other.hi), _add_hi(self.hi, -other.lo))

    def __rsub__(self, other):
        try:
            other = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if type(other) is not Interval:
            try:
                other = Interval.coerce(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        if a >= 0.0 and c >= 0.0:
            return _make(_mul_lo(a, c), _mul_hi(b, d))
        return _make(
            min(_mul_lo(a, c), _mul_lo(a, d), _mul_lo(b, c), _mul_lo(b, d)),
            max(_mul_hi(a, c), _mul_hi(a, d), _mul_hi(b, c), _mul_hi(b, d)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is not Interval:
            try:
                other = Interval.coerce(other)
            except TypeError:
                return NotImplemented
        c, d = other.lo, other.hi
        if c <= 0.0 <= d:
            raise DomainError(f"division by an interval containing zero: {other}")
        a, b = self.lo, self.hi
        if a >= 0.0 and c > 0.0:
            return _make(_div_lo(a, d), _div_hi(b, c))
        return _make(
            min(_div_lo(a, c), _div_lo(a, d), _div_lo(b, c), _div_lo(b, d)),
            max(_div_hi(a, c), _div_hi(a, d), _div_hi(b, c), _div_hi(b, d)),
        )

    def __rtruediv__(self, other):
        try:
            other = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        return other / self

    def __pow__(self, exponent):
        if isinstance(exponent, int) and not isinstance(exponent, bool):
            return pow_int(self, exponent)
        return pow_real(self, Interval.coerce(exponent))

    def square(self) -> "Interval":
        return pow_int(self, 2)

    # -- comparisons on certifying endpoints --------------------------------
    def certainly_lt(self, other) -> bool:
        return self.hi < Interval.coerce(other).lo

    def certainly_gt(self, other) -> bool:
        return self.lo > Interval.coerce(other).hi

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{format_lo(self.lo, 17)}, {format_hi(self.hi, 17)}]"


_new = object.__new__
_set = object.__setattr__


def _make(lo: float, hi: float) -> Interval:
    # unchecked constructor for internal hot paths
    r = _new(Interval)
    _set(r, "lo", lo)
    _set(r, "hi", hi)
    return r


def point(x) -> Interval:
    """Tightest enclosure of a single number."""
    return Interval.coerce(x)


ZERO = _make(0.0, 0.0)
ONE = _make(1.0, 1.0)


def hull(*items) -> Interval:
    ivs = [Interval.coerce(v) for v in items]
    return _make(min(v.lo for v in ivs), max(v.hi for v in ivs))


def isum(items) -> Interval:
    """Outward sum of an iterable of intervals."""
    lo = hi = 0.0
    for v in items:
        lo = _add_lo(lo, v.lo)
        hi = _add_hi(hi, v.hi)
    return _make(lo, hi)


# ---------------------------------------------------------------------------
# decimal rendering


def format_lo(x: float, digits: int = 10) -> str:
    """Decimal string with ``digits`` significant digits, never above x."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(Context(prec=digits, rounding=ROUND_FLOOR).plus(Decimal(x)))


def format_hi(x: float, digits: int = 10) -> str:
    """Decimal string with ``digits`` significant digits, never below x."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(Context(prec=digits, rounding=ROUND_CEILING).plus(Decimal(x)))


def fixed_lo(x: float, places: int = 10) -> str:
    """Decimal string with ``places`` digits after the point, never above x."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(Decimal(x).quantize(Decimal(1).scaleb(-places), rounding=ROUND_FLOOR))


def fixed_hi(x: float, places: int = 10) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(Decimal(x).quantize(Decimal(1).scaleb(-places), rounding=ROUND_CEILING))


# ---------------------------------------------------------------------------
# certified constants

# Truncated decimal expansions; the neglected tails are below 1e-100.
_PI_DIGITS = (
    "3.14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
)
_LN2_DIGITS = (
    "0.69314718055994530941723212145817656807550013436025"
    "52541206800094933936219696947156058633269964186875"
)
_DIGIT_SLACK = Fraction(1, 10**100)


def _digits_interval(digits: str) -> Interval:
    q = Fraction(digits)
    return _make(fraction_bounds(q)[0], fraction_bounds(q + _DIGIT_SLACK)[1])


def _split_high(q: Fraction, bits: int) -> float:
    """Float with about ``bits`` significant bits approximating q."""
    exponent = math.frexp(float(q))[1]
    shift = bits - exponent
    return math.ldexp(round(q * 2**shift), -shift)


PI = _digits_interval(_PI_DIGITS)
LN2 = _digits_interval(_LN2_DIGITS)
TWO_PI = PI * 2.0
HALF_PI = PI * 0.5

_pi_q = Fraction(_PI_DIGITS)
_half_pi_q = _pi_q / 2
_P1 = _split_high(_half_pi_q, 33)
_P2 = _split_high(_half_pi_q - _P1, 33)
_p3_q = _half_pi_q - Fraction(_P1) - Fraction(_P2)
_P3 = _make(fraction_bounds(_p3_q)[0], fraction_bounds(_p3_q + _DIGIT_SLACK)[1])

_ln2_q = Fraction(_LN2_DIGITS)
_LN2_HI = _split_high(_ln2_q, 32)
_ln2_lo_q = _ln2_q - Fraction(_LN2_HI)
_LN2_LO = _make(fraction_bounds(_ln2_lo_q)[0], fraction_bounds(_ln2_lo_q + _DIGIT_SLACK)[1])

SIN_COS_LIMIT = 1.0e4


def pi() -> Interval:
    """Enclosure of pi one ulp wide."""
    return PI


def ln2() -> Interval:
    return LN2


# ---------------------------------------------------------------------------
# elementary functions


def sqrt(x) -> Interval:
    x = Interval.coerce(x)
    if x.lo < 0.0:
        raise DomainError(f"sqrt of an interval with negative part: {x}")
    return _make(_sqrt_directed(x.lo, False), _sqrt_directed(x.hi, True))


def _sqrt_directed(v: float, up: bool) -> float:
    r = math.sqrt(v)
    if r == 0.0 or r == INF:
        return r
    if _SAFE_SMALL < v < _SAFE_BIG:
        # sign of v - r^2, with r^2 = p + e exactly and v - p exact
        p = r * r
        diff, e = v - p, _two_prod_err(r, r, p)
        side = (diff > e) - (diff < e)
    else:
        exact = Fraction(v) - Fraction(r) ** 2
        side = (exact > 0) - (exact < 0)
    if up:
        return next_up(r) if side > 0 else r
    return next_down(r) if side < 0 else r


_EXP_TERMS = 18
_EXP_TAIL = (Interval(1.5) / Interval(math.factorial(_EXP_TERMS + 1))).hi
_INV_LN2 = 1.4426950408889634
_EXP_OVERFLOW = 709.79
_EXP_UNDERFLOW = -745.2


# The series kernels below run plain round-to-nearest Horner loops and widen
# the result afterwards by an a-priori bound.  With nonnegative terms every
# term of the computed sum carries at most 52 factors (1 + d), |d| <= u, so
# the exact value lies within a relative 56u of the computed one; underflow
# in a product adds at most 2^-1074 per step, far inside the spare 3u.
_U = 2.0**-53
_REL_LO = 1.0 - 56.0 * _U
_REL_HI = 1.0 + 56.0 * _U
_EXP_DIVISORS = tuple(float(j) for j in range(_EXP_TERMS, 0, -1))


def _exp_poly(r: float) -> float:
    p = 1.0
    for fj in _EXP_DIVISORS:
        p = 1.0 + r * p / fj
    return p


def _exp_taylor(rlo: float, rhi: float) -> tuple[float, float]:
    """exp on 0 <= rlo <= rhi <= 0.36 by Taylor series plus a Lagrange tail."""
    # exp(r) >= 1 + r keeps the bounds ordered across r = 0
    lo = max(_mul_lo(_exp_poly(rlo), _REL_LO), _add_lo(1.0, rlo))
    hi = _mul_hi(_exp_poly(rhi), _REL_HI)
    # remainder r^(N+1)/(N+1)! * e^r with e^0.36 < 1.5
    return lo, _add_hi(hi, _mul_hi(_pow_pos_hi(rhi, _EXP_TERMS + 1), _EXP_TAIL))


def _exp_reduced(rlo: float, rhi: float) -> tuple[float, float]:
    if rlo >= 0.0:
        return _exp_taylor(rlo, rhi)
    if rhi <= 0.0:
        lo, hi = _exp_taylor(-rhi, -rlo)
        return _div_lo(1.0, hi), _div_hi(1.0, lo)
    # straddles zero: exp is monotone, bound each end separately
    a = _exp_taylor(0.0, -rlo)
    b = _exp_taylor(0.0, rhi)
    return _div_lo(1.0, a[1]), b[1]


def _scale(v: float, k: int, up: bool) -> float:
    s = math.ldexp(v, k)
    if s == INF or abs(s) < 2.2250738585072014e-308:
        return next_up(s) if up else next_down(s)
    return s


def _exp_point(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 1.0, 1.0
    if x > _EXP_OVERFLOW:
        return MAX_FLOAT, INF
    if x < _EXP_UNDERFLOW:
        return 0.0, MIN_SUBNORMAL
    # x = k ln2 + r, with k*_LN2_HI exact and fsum correctly rounded
    k = round(x * _INV_LN2)
    fk = float(k)
    t = math.fsum((x, -fk * _LN2_HI))
    tl, th = (t, t) if t == 0.0 else (next_down(t), next_up(t))
    c = _LN2_LO * fk
    lo, hi = _exp_reduced(_add_lo(tl, -c.hi), _add_hi(th, -c.lo))
    return max(_scale(lo, k, False), 0.0), _scale(hi, k, True)


def exp(x) -> Interval:
    x = Interval.coerce(x)
    if x.lo == x.hi:
        return _make(*_exp_point(x.lo))
    lo = _exp_point(x.lo)[0] if x.lo > -INF else 0.0
    hi = _exp_point(x.hi)[1] if x.hi < INF else INF
    return _make(lo, hi)


_LOG_TERMS = 16
_SQRT_HALF = 0.7071067811865476


_ATANH_COEFFS = tuple(1.0 / float(2 * j + 1) for j in range(_LOG_TERMS, -1, -1))


def _atanh_poly(z2: float) -> float:
    acc = 0.0
    for c in _ATANH_COEFFS:
        acc = c + z2 * acc
    return acc


def _atanh_series(zlo: float, zhi: float) -> tuple[float, float]:
    """sum z^(2j+1)/(2j+1) for 0 <= zlo <= zhi <= 0.18, with tail bound."""
    z2lo, z2hi = _mul_lo(zlo, zlo), _mul_hi(zhi, zhi)
    lo = _mul_lo(_mul_lo(zlo, _atanh_poly(z2lo)), _REL_LO)
    hi = _mul_hi(_mul_hi(zhi, _atanh_poly(z2hi)), _REL_HI)
    # tail: z^(2K+3) / ((2K+3)(1 - z^2))
    n = 2 * _LOG_TERMS + 3
    tail = _div_hi(_pow_pos_hi(zhi, n), _mul_lo(float(n), _add_lo(1.0, -z2hi)))
    return lo, _add_hi(hi, tail)


def _log_point(x: float) -> tuple[float, float]:
    if x == 1.0:
        return 0.0, 0.0
    if x == INF:
        return MAX_FLOAT, INF
    m, e = math.frexp(x)
    if m < _SQRT_HALF:
        m *= 2.0
        e -= 1
    # ln m = 2 atanh z with z = (m - 1)/(m + 1); m - 1 is exact here
    num = m - 1.0
    den_lo, den_hi = _add_lo(m, 1.0), _add_hi(m, 1.0)
    if num >= 0.0:
        a, b = _atanh_series(_div_lo(num, den_hi), _div_hi(num, den_lo))
        lo, hi = 2.0 * a, 2.0 * b
    else:
        a, b = _atanh_series(_div_lo(-num, den_hi), _div_hi(-num, den_lo))
        lo, hi = -2.0 * b, -2.0 * a
    if e:
        fe = float(e)
        c = _LN2_LO * fe
        lo = _add_lo(_add_lo(lo, fe * _LN2_HI), c.lo)
        hi = _add_hi(_add_hi(hi, fe * _LN2_HI), c.hi)
    return lo, hi


def log(x) -> Interval:
    x = Interval.coerce(x)
    if x.lo <= 0.0:
        raise DomainError(f"log needs a positive argument, got {x}")
    if x.is_point:
        return _make(*_log_point(x.lo))
    return _make(_log_point(x.lo)[0], _log_point(x.hi)[1])


ln = log

_TRIG_TERMS = 12
_TWO_OVER_PI = 0.6366197723675814
_SIN_TAIL = (Interval(2.0) / Interval(math.factorial(2 * _TRIG_TERMS + 3))).hi
_COS_TAIL = (Interval(2.0) / Interval(math.factorial(2 * _TRIG_TERMS + 2))).hi


def _check_trig(x: Interval) -> None:
    if not (-SIN_COS_LIMIT <= x.lo and x.hi <= SIN_COS_LIMIT):
        raise DomainError(f"sin/cos arguments are limited to |x| <= 1e4, got {x}")


def _alternating(r2lo: float, r2hi: float, first: int) -> tuple[float, float]:
    """1 - r2/(a(a+1)) (1 - r2/((a+2)(a+3)) (...)) for r2 <= 0.62.

    ``first`` is 2 for the sin factor and 1 for cos; every partial value
    stays in (0, 1], so directed rounding of each step is monotone.
    """
    lo = hi = 1.0
    for j in range(_TRIG_TERMS, 0, -1):
        a = 2 * j + first - 2
        d = float(a * (a + 1))
        plo = _div_lo(_mul_lo(r2lo, lo), d)
        phi = _div_hi(_mul_hi(r2hi, hi), d)
        lo, hi = _add_lo(1.0, -phi), _add_hi(1.0, -plo)
    return lo, hi


def _sin_reduced(r: Interval) -> Interval:
    """sin r for |r| <= pi/4 + tiny."""
    rmag = r.mag()
    r2lo, r2hi = _mul_lo(r.mig(), r.mig()), _mul_hi(rmag, rmag)
    s = r * _make(*_alternating(r2lo, r2hi, 2))
    tail = _mul_hi(_pow_pos_hi(rmag, 2 * _TRIG_TERMS + 3), _SIN_TAIL)
    return _make(_add_lo(s.lo, -tail), _add_hi(s.hi, tail))


def _cos_reduced(r: Interval) -> Interval:
    """cos r for |r| <= pi/4 + tiny."""
    rmag = r.mag()
    clo, chi = _alternating(_mul_lo(r.mig(), r.mig()), _mul_hi(rmag, rmag), 1)
    tail = _mul_hi(_pow_pos_hi(rmag, 2 * _TRIG_TERMS + 2), _COS_TAIL)
    return _make(_add_lo(clo, -tail), _add_hi(chi, tail))


def _clamp_unit(v: Interval) -> Interval:
    return _make(max(v.lo, -1.0), min(v.hi, 1.0))


def _trig_point(x: float, which: int) -> Interval:
    """sin x (which = 0) or cos x (which = 1)."""
    if x == 0.0:
        return (ZERO, ONE)[which]
    # x = k pi/2 + r with pi/2 split as _P1 + _P2 + _P3; k*_P1, k*_P2 exact
    k = round(x * _TWO_OVER_PI)
    fk = float(k)
    t = math.fsum((x, -fk * _P1, -fk * _P2))
    tl, th = (t, t) if t == 0.0 else (next_down(t), next_up(t))
    r = _make(tl, th) - _P3 * fk
    # sin x = s, c, -s, -c and cos x = c, -s, -c, s in quadrants 0..3
    quadrant = (k + which) % 4
    v = _sin_reduced(r) if quadrant % 2 == 0 else _cos_reduced(r)
    return _clamp_unit(v if quadrant < 2 else -v)


def _trig(x: Interval, shift: float, which: int) -> Interval:
    # extrema of sin sit at (j + 1/2) pi, those of cos at j pi; value (-1)^j
    if x.is_point:
        return _trig_point(x.lo, which)
    if x.hi - x.lo >= 6.5:
        return _make(-1.0, 1.0)
    a = _trig_point(x.lo, which)
    b = _trig_point(x.hi, which)
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    first = math.floor(x.lo / math.pi - shift) - 1
    last = math.ceil(x.hi / math.pi - shift) + 1
    for j in range(first, last + 1):
        crit = PI * (j + shift)
        if crit.hi >= x.lo and crit.lo <= x.hi:
            if j % 2 == 0:
                hi = 1.0
            else:
                lo = -1.0
    return _make(lo, hi)


def sin(x) -> Interval:
    x = Interval.coerce(x)
    _check_trig(x)
    return _trig(x, 0.5, 0)


def cos(x) -> Interval:
    x = Interval.coerce(x)
    _check_trig(x)
    return _trig(x, 0.0, 1)


def pow_int(x, n: int) -> Interval:
    """x**n for an integer n by repeated squaring, outward at every step."""
    x = Interval.coerce(x)
    n = int(n)
    if n == 0:
        return ONE
    if n < 0:
        return ONE / pow_int(x, -n)
    if n == 1:
        return x
    a, b = x.lo, x.hi
    if n % 2 == 0:
        lo_abs, hi_abs = x.mig(), x.mag()
        return _make(_pow_pos_lo(lo_abs, n), _pow_pos_hi(hi_abs, n))
    lo = _pow_pos_lo(a, n) if a >= 0.0 else -_pow_pos_hi(-a, n)
    hi = _pow_pos_hi(b, n) if b >= 0.0 else -_pow_pos_lo(-b, n)
    return _make(lo, hi)


def _root_point_lo(x: float, n: int) -> float:
    if x == 0.0 or x == INF:
        return x if x == 0.0 else MAX_FLOAT
    y = x ** (1.0 / n)
    while _pow_pos_hi(y, n) > x:
        y = next_down(y)
    return y


def _root_point_hi(x: float, n: int) -> float:
    if x == 0.0 or x == INF:
        return x
    y = x ** (1.0 / n)
    while _pow_pos_lo(y, n) < x:
        y = next_up(y)
    return y


def root_n(x, n: int) -> Interval:
    """Principal n-th root of a nonnegative interval, n >= 1."""
    x = Interval.coerce(x)
    n = int(n)
    if n < 1:
        raise DomainError(f"root order must be >= 1, got {n}")
    if x.lo < 0.0:
        raise DomainError(f"root of an interval with negative part: {x}")
    if n == 1:
        return x
    return _make(_root_point_lo(x.lo, n), _root_point_hi(x.hi, n))


def _integer_value(e: Interval) -> int | None:
    if e.is_point and math.isfinite(e.lo) and e.lo == math.floor(e.lo) and abs(e.lo) <= 2**31:
        return int(e.lo)
    return None


def pow_real(x, e) -> Interval:
    """x**e = exp(e * log x) for x >= 0; integer exponents use pow_int."""
    x = Interval.coerce(x)
    e = Interval.coerce(e)
    k = _integer_value(e)
    if k is not None and (k >= 0 or x.lo > 0.0):
        return pow_int(x, k)
    if x.lo < 0.0:
        raise DomainError(f"real power of an interval with negative part: {x}")
    if x.lo > 0.0:
        return exp(e * log(x))
    if e.lo <= 0.0:
        raise DomainError("real power of an interval touching zero needs a positive exponent")
    if x.hi == 0.0:
        return ZERO
    top = exp(e * log(_make(x.hi, x.hi)))
    return _make(0.0, top.hi)


# ---------------------------------------------------------------------------
# gamma


_STIRLING = [
    Fraction(1, 12),
    Fraction(-1, 360),
    Fraction(1, 1260),
    Fraction(-1, 1680),
    Fraction(1, 1188),
    Fraction(-691, 360360),
    Fraction(1, 156),
    Fraction(-3617, 122400),
]
_STIRLING_NEXT = Fraction(43867, 244188)
_STIRLING_IV = [Interval(c) for c in _STIRLING]
_STIRLING_SHIFT = 8.0
HALF_LN_TWO_PI = log(TWO_PI) * 0.5

# Gamma is decreasing on (0, x0) and increasing on (x0, inf) with
# x0 = 1.46163214496836..., min value 0.88560319441088870...
_GAMMA_ARGMIN_BELOW = 1.461
_GAMMA_ARGMIN_ABOVE = 1.462
_GAMMA_MIN_LOWER = 0.885603194


def _lgamma_large(y: Interval) -> Interval:
    """ln Gamma(y) for y >= 8 by Stirling's series.

    For positive y the remainder after the last kept term has the sign and
    at most the size of the first omitted term.
    """
    inv = ONE / y
    inv2 = pow_int(inv, 2)
    acc = _STIRLING_IV[-1]
    for c in reversed(_STIRLING_IV[:-1]):
        acc = c + inv2 * acc
    series = inv * acc
    tail = (Interval(_STIRLING_NEXT) / pow_int(_make(y.lo, y.lo), 17)).hi
    main = (y - 0.5) * log(y) - y + HALF_LN_TWO_PI
    return main + series + _make(0.0, tail)


def _gamma_point(x: float) -> Interval:
    shift = max(0, math.ceil(_STIRLING_SHIFT - x))
    xi = _make(x, x)
    y = xi + float(shift)
    value = exp(_lgamma_large(y))
    if shift:
        prod = xi
        for j in range(1, shift):
            prod = prod * (xi + float(j))
        value = value / prod
    return value


def gamma(x) -> Interval:
    """Enclosure of the gamma function on a positive interval."""
    x = Interval.coerce(x)
    if x.lo <= 0.0:
        raise DomainError(f"gamma is only enclosed for positive arguments, got {x}")
    if x.is_point:
        return _gamma_point(x.lo)
    if x.hi == INF:
        return _make(_GAMMA_MIN_LOWER if x.lo < _GAMMA_ARGMIN_ABOVE else _gamma_point(x.lo).lo, INF)
    a = _gamma_point(x.lo)
    b = _gamma_point(x.hi)
    if x.lo >= _GAMMA_ARGMIN_ABOVE:
        return _make(a.lo, b.hi)
    if x.hi <= _GAMMA_ARGMIN_BELOW:
        return _make(b.lo, a.hi)
    return _make(_GAMMA_MIN_LOWER, max(a.hi, b.hi))


# ---------------------------------------------------------------------------
# dispatch by name


_ARITH = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
    "neg": lambda x, y: -x,
}


def arith(op: str, x, y=None) -> Interval:
    """Apply a named arithmetic operation; ``neg`` ignores ``y``."""
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown arithmetic op {op!r}") from None
    x = Interval.coerce(x)
    return fn(x, None if y is None else Interval.coerce(y))


def elementary(fn: str, x, aux=None) -> Interval:
    """Apply a named elementary function; ``aux`` is the exponent or root order."""
    if fn == "sqrt":
        return sqrt(x)
    if fn == "exp":
        return exp(x)
    if fn in ("ln", "log"):
        return log(x)
    if fn == "sin":
        return sin(x)
    if fn == "cos":
        return cos(x)
    if fn == "pow_int":
        return pow_int(x, int(aux))
    if fn == "pow_real":
        return pow_real(x, aux)
    if fn == "root_n":
        return root_n(x, int(aux))
    if fn == "gamma":
        return gamma(x)
    raise ValueError(f"unknown elementary function {fn!r}")

