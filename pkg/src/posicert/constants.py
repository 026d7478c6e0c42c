"""Geometric and functional-analytic constants with rigorous enclosures.

Covers the unit-ball volume B_N, the Rayleigh-Faber-Krahn constant
A_{1,N} = B_N^(2/N) j^2 (j the first zero of J_(N/2-1)), the Li-Yau
eigenvalue bound, Talenti's Sobolev constant T_{p,N}, the embedding
constants C_p(Omega) = |Omega|^(1/N + 1/p - 1/2) T_{p,N}, and the Poincare
constant C_2 = lambda_1^(-1/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ConfigurationError, DomainError
from .interval import PI, Interval, gamma, parse_exact, pow_int, pow_real, sqrt
from .special import first_zero

MAX_DIMENSION = 10
RFK_DIMENSIONS = (2, 3, 4, 5)
# Zero enclosures feeding A_{1,N} are refined well below the 10-digit tables.
RFK_ZERO_TOL = 1e-13


def _exact(value) -> Fraction:
    """Exact rational value of a point number or numeric string."""
    if isinstance(value, Interval):
        if not value.is_point:
            raise TypeError("expected a point value")
        return Fraction(value.lo)
    if isinstance(value, str):
        return Fraction(parse_exact(value))
    return Fraction(value)


def _check_dimension(n: int, top: int = MAX_DIMENSION) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if not 2 <= n <= top:
        raise DomainError(f"dimension must lie in 2..{top}, got {n}")
    return n


@dataclass(frozen=True)
class DomainSpec:
    """What is known about the domain: dimension, volume and optionally lambda_1.

    ``sides`` marks a hyperrectangle with those side lengths, for which
    lambda_1 = sum pi^2 / l_i^2 exactly.  When neither ``lambda1_lower`` nor
    ``sides`` is given, the Rayleigh-Faber-Krahn bound is used unless
    ``allow_rfk_fallback`` is False.
    """

    dimension: int
    volume: Interval
    lambda1_lower: Interval | None = None
    sides: tuple | None = None
    allow_rfk_fallback: bool = True
    lambda1_source: str = ""

    def __post_init__(self):
        _check_dimension(self.dimension)
        object.__setattr__(self, "volume", Interval.coerce(self.volume))
        if not self.volume.lo > 0.0:
            raise DomainError(f"domain volume must be positive, got {self.volume}")
        if self.lambda1_lower is not None:
            lam = Interval.coerce(self.lambda1_lower)
            if not lam.lo > 0.0:
                raise DomainError(f"lambda1 lower bound must be positive, got {lam}")
            object.__setattr__(self, "lambda1_lower", lam)
        if self.sides is not None:
            sides = tuple(Interval.coerce(s) for s in self.sides)
            if len(sides) != self.dimension or any(not s.lo > 0.0 for s in sides):
                raise DomainError("sides must list one positive length per dimension")
            object.__setattr__(self, "sides", sides)

    @classmethod
    def hyperrectangle(cls, sides, **kwargs) -> "DomainSpec":
        ivs = [Interval.coerce(s) for s in sides]
        if all(s.is_point for s in ivs):
            volume = Interval(math.prod(Fraction(s.lo) for s in ivs))
        else:
            volume = Interval(1.0)
            for s in ivs:
                volume = volume * s
        return cls(dimension=len(ivs), volume=volume, sides=tuple(ivs), **kwargs)

    @classmethod
    def unit_square(cls) -> "DomainSpec":
        return cls.hyperrectangle([1, 1])

    @classmethod
    def unit_cube(cls, dimension: int) -> "DomainSpec":
        return cls.hyperrectangle([1] * dimension)


@lru_cache(maxsize=None)
def unit_ball_volume(dimension: int) -> Interval:
    """B_N = pi^(N/2) / Gamma(N/2 + 1)."""
    n = _check_dimension(dimension)
    if n % 2 == 0:
        return pow_int(PI, n // 2) / Interval(math.factorial(n // 2))
    return pow_int(PI, n // 2) * sqrt(PI) / gamma(Interval(Fraction(n, 2) + 1))


@lru_cache(maxsize=None)
def bessel_zero_for_dimension(dimension: int) -> Interval:
    """First positive zero of J_(N/2 - 1)."""
    n = _check_dimension(dimension, top=5)
    return first_zero(Fraction(n, 2) - 1, RFK_ZERO_TOL).zero


@lru_cache(maxsize=None)
def rfk_constant(dimension: int) -> Interval:
    """A_{1,N} with lambda_1(Omega) >= A_{1,N} |Omega|^(-2/N), for N = 2..5."""
    n = _check_dimension(dimension, top=5)
    ball = pow_real(unit_ball_volume(n), Interval(Fraction(2, n)))
    return ball * pow_int(bessel_zero_for_dimension(n), 2)


def liyau_lower(k: int, dimension: int, volume) -> Interval:
    """Li-Yau bound lambda_k >= 4 pi^2 N/(N+2) (k / (B_N |Omega|))^(2/N).

    The ``lo`` endpoint is the usable lower bound.
    """
    n = _check_dimension(dimension)
    if int(k) != k or k < 1:
        raise DomainError(f"eigenvalue index must be a positive integer, got {k}")
    volume = Interval.coerce(volume)
    if not volume.lo > 0.0:
        raise DomainError(f"volume must be positive, got {volume}")
    factor = pow_int(PI, 2) * Interval(Fraction(4 * n, n + 2))
    ratio = Interval(int(k)) / (unit_ball_volume(n) * volume)
    return factor * pow_real(ratio, Interval(Fraction(2, n)))


def talenti_range(dimension: int) -> tuple[Fraction, Fraction | None]:
    """Admissible p: (lower, upper) with p > lower and p <= upper (None = unbounded)."""
    n = _check_dimension(dimension)
    if n == 2:
        return Fraction(2), None
    return Fraction(n, n - 1), Fraction(2 * n, n - 2)


def _check_talenti_p(p_lo, p_hi, n: int) -> None:
    low, high = talenti_range(n)
    if not (p_lo > low and (high is None or p_hi <= high)):
        upper = "inf)" if high is None else f"{high}]"
        raise DomainError(f"p must lie in ({low}, {upper} for N = {n}, got [{p_lo}, {p_hi}]")


def _talenti_formula(p: Interval, n: int) -> Interval:
    big_n = Interval(n)
    # N / (N/p + 1) uses p once, so the enclosure of q stays sharp
    q = big_n / (big_n / p + 1.0)
    inv_q = Interval(1.0) / q
    n_over_q = big_n * inv_q
    head = pow_real(PI, Interval(-0.5)) * pow_real(big_n, -inv_q)
    ratio = pow_real((q - 1.0) / (big_n - q), Interval(1.0) - inv_q)
    gammas = gamma(Interval(Fraction(n, 2) + 1)) * gamma(big_n)
    gammas = gammas / (gamma(n_over_q) * gamma(big_n + 1.0 - n_over_q))
    return head * ratio * pow_real(gammas, Interval(Fraction(1, n)))


@lru_cache(maxsize=256)
def _talenti_exact(p: Fraction, n: int) -> Interval:
    # rational p: q, N/q and 1 - 1/q are formed exactly before widening
    q = n * p / (n + p)
    head = pow_real(PI, Interval(-0.5)) * pow_real(Interval(n), Interval(-1 / q))
    ratio = pow_real(Interval((q - 1) / (n - q)), Interval(1 - 1 / q))
    gammas = gamma(Interval(Fraction(n, 2) + 1)) * gamma(Interval(n))
    gammas = gammas / (gamma(Interval(n / q)) * gamma(Interval(1 + n - n / q)))
    return head * ratio * pow_real(gammas, Interval(Fraction(1, n)))


def talenti(p, dimension: int) -> Interval:
    """Talenti's best Sobolev constant T_{p,N}, q = Np/(N+p)."""
    n = _check_dimension(dimension)
    if isinstance(p, Interval) and not p.is_point:
        _check_talenti_p(p.lo, p.hi, n)
        return _talenti_formula(p, n)
    exact = _exact(p)
    _check_talenti_p(exact, exact, n)
    return _talenti_exact(exact, n)


def embedding_exponent(p, dimension: int) -> Fraction:
    """1/N + 1/p - 1/2, the volume exponent of C_p(Omega)."""
    return Fraction(1, dimension) + 1 / _exact(p) - Fraction(1, 2)


def embedding_const(p, dom: DomainSpec) -> Interval:
    """C_p(Omega) = |Omega|^(1/N + 1/p - 1/2) T_{p,N}; ``hi`` is the usable bound."""
    exact = _exact(p)
    if exact == 2:
        raise DomainError("p = 2 is not covered by the Talenti bound; use poincare_c2")
    t = talenti(exact, dom.dimension)
    return pow_real(dom.volume, Interval(embedding_exponent(exact, dom.dimension))) * t


def lambda1_lower_bound(dom: DomainSpec) -> tuple[Interval, str]:
    """Lower bound for lambda_1(Omega) and a tag naming its source.

    Sources in order of preference: an explicit value, the exact
    hyperrectangle eigenvalue sum pi^2/l_i^2, then Rayleigh-Faber-Krahn.
    """
    if dom.lambda1_lower is not None:
        return dom.lambda1_lower, dom.lambda1_source or "explicit"
    if dom.sides is not None:
        total = Interval(0.0)
        for side in dom.sides:
            total = total + Interval(1.0) / pow_int(side, 2)
        return pow_int(PI, 2) * total, "hyperrectangle"
    if dom.allow_rfk_fallback and dom.dimension in RFK_DIMENSIONS:
        scale = pow_real(dom.volume, Interval(Fraction(-2, dom.dimension)))
        return rfk_constant(dom.dimension) * scale, "rayleigh-faber-krahn"
    raise ConfigurationError(
        "no source for a lambda_1 lower bound: give lambda1_lower or sides, "
        "or allow the Rayleigh-Faber-Krahn fallback (N = 2..5)"
    )


def poincare_c2(dom: DomainSpec) -> Interval:
    """C_2(Omega) = 1/sqrt(lambda_1); ``hi`` is the certified bound."""
    lam, _ = lambda1_lower_bound(dom)
    return Interval(1.0) / sqrt(lam)


def lq_constant(q, dom: DomainSpec) -> Interval:
    """Embedding constant for L^q: Poincare for q = 2, Talenti otherwise."""
    if _exact(q) == 2:
        return poincare_c2(dom)
    return embedding_const(q, dom)
