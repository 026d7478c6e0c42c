"""The positivity test for -Laplace(u) = f(u), u = 0 on the boundary.

Given an approximation u_hat with cellwise bounds, an error radius rho with
||u - u_hat||_{H^1_0} <= rho and a growth bound

    -f(-t) <= lam t + sum_i a_i t^(p_i)   for all t >= 0,

the test succeeds at a level m > 0 when

1. the support condition ||u_hat_plus||_{L^q(D(m))} > C_q rho holds, so
   |supp u_minus| <= |D(m)|;
2. lam < A_{1,N} |D(m)|^(-2/N), a lower bound of lambda_1(supp u_minus);
3. C1 < C2 with
   C1 = sum_i a_i |D|^(2/N + 2/(p_i+1) - 1) T_i^2
        (||u_hat_minus||_{L^(p_i+1)} + |Omega|^(1/N + 1/(p_i+1) - 1/2) T_i rho)^(p_i - 1),
   C2 = 1 - (lam / A_{1,N}) |D|^(2/N),  T_i = T_{p_i+1,N}.

Then u >= 0.  Every comparison uses the certifying endpoints only, and
ties count as failures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .constants import DomainSpec, lambda1_lower_bound, lq_constant, rfk_constant, talenti
from .errors import ConfigurationError, DomainError
from .field import CellMesh, dm_vol_upper, minus_norm_upper, plus_norm_lower
from .interval import INF, MAX_FLOAT, Interval, format_hi, format_lo, pow_real

CERT_FORMAT = "positivity-cert/1"
VERIFIED = "VERIFIED_NONNEGATIVE"
INCONCLUSIVE = "INCONCLUSIVE"
DEFAULT_M_CANDIDATES = tuple(2.0**-k for k in range(1, 9))
INFINITE_EIGEN_BOUND = Interval(MAX_FLOAT, INF)


def _exact(value) -> Fraction:
    return Fraction(value) if not isinstance(value, str) else Fraction(value.strip())


def critical_exponent(dimension: int) -> Fraction | None:
    """p* = (N+2)/(N-2) for N >= 3; None (infinite) for N = 2."""
    return None if dimension == 2 else Fraction(dimension + 2, dimension - 2)


@dataclass(frozen=True)
class NonlinearityBound:
    """lam and pairs (a_i, p_i) with -f(-t) <= lam t + sum a_i t^p_i for t >= 0."""

    lam: Fraction
    terms: tuple[tuple[Fraction, Fraction], ...] = ()
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", _exact(self.lam))
        terms = tuple((_exact(a), _exact(p)) for a, p in self.terms)
        for a, p in terms:
            if a < 0:
                raise DomainError(f"growth coefficient a must be >= 0, got {a}")
            if p <= 1:
                raise DomainError(f"growth exponent p must exceed 1, got {p}")
        object.__setattr__(self, "terms", terms)

    def check_subcritical(self, dimension: int) -> None:
        top = critical_exponent(dimension)
        for _, p in self.terms:
            if top is not None and p >= top:
                raise DomainError(f"exponent {p} is not subcritical for N = {dimension} (p* = {top})")

    @classmethod
    def lane_emden(cls, p, lam=0) -> "NonlinearityBound":
        return cls(lam, ((1, p),), "lane_emden", {"p": str(p), "lam": str(lam)})

    @classmethod
    def allen_cahn(cls, lam) -> "NonlinearityBound":
        return cls(lam, (), "allen_cahn", {"lam": str(lam)})

    @classmethod
    def nagumo(cls, lam, a) -> "NonlinearityBound":
        lam, a = _exact(lam), _exact(a)
        return cls(0, ((lam * (1 + a), 2),), "nagumo", {"lam": str(lam), "a": str(a)})

    @classmethod
    def lions(cls, lam, big_a, big_b=1) -> "NonlinearityBound":
        lam, big_a = _exact(lam), _exact(big_a)
        return cls(lam, ((lam * big_a, 2),), "lions", {"lam": str(lam), "A": str(big_a), "B": str(big_b)})

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "lambda": str(self.lam),
            "terms": [[str(a), str(p)] for a, p in self.terms],
        }


def check_q(q, dimension: int) -> Fraction:
    """q must lie in [2, p* + 1); for N >= 3 that is [2, 2N/(N-2))."""
    q = _exact(q)
    top = critical_exponent(dimension)
    if q < 2 or (top is not None and q >= top + 1):
        upper = "inf" if top is None else str(top + 1)
        raise DomainError(f"q must lie in [2, {upper}) for N = {dimension}, got {q}")
    return q


def support_condition(mesh: CellMesh, dom: DomainSpec, q, m, rho) -> Interval:
    """plus_norm_lower(q, m) - C_q rho; ``lo > 0`` gives |supp u_minus| <= |D(m)|."""
    q = check_q(q, dom.dimension)
    rho = Interval.coerce(rho)
    if rho.lo < 0.0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    if not float(m) > 0.0:
        raise DomainError(f"m must be positive, got {m}")
    return plus_norm_lower(mesh, q, m) - lq_constant(q, dom) * rho


def eigen_lower_bound(dm_volume: Interval, dimension: int) -> Interval:
    """A_{1,N} |D(m)|^(-2/N), a lower bound for lambda_1(supp u_minus).

    An empty sublevel set (dm_volume.hi == 0) gives INFINITE_EIGEN_BOUND:
    any lam is then below the bound.
    """
    dm_volume = Interval.coerce(dm_volume)
    if dm_volume.lo < 0.0:
        raise DomainError(f"volume must be >= 0, got {dm_volume}")
    if dm_volume.hi == 0.0:
        return INFINITE_EIGEN_BOUND
    exponent = Interval(Fraction(-2, dimension))
    a = rfk_constant(dimension)
    lower = (a * pow_real(Interval(dm_volume.hi), exponent)).lo
    if dm_volume.lo == 0.0:
        return Interval(lower, INF)
    return Interval(lower, (a * pow_real(Interval(dm_volume.lo), exponent)).hi)


def is_infinite(bound: Interval) -> bool:
    return bound.hi == INF


def compute_c1(nl: NonlinearityBound, dom: DomainSpec, dm_volume: Interval, minus_norms, rho) -> Interval:
    """C1 of the positivity test; ``hi`` is the certified value.

    ``minus_norms[i]`` bounds ||u_hat_minus||_{L^(p_i+1)} from above.
    """
    n = dom.dimension
    nl.check_subcritical(n)
    rho = Interval.coerce(rho)
    if len(minus_norms) != len(nl.terms):
        raise ValueError("one minus-norm bound is needed per growth term")
    total = Interval(0.0)
    for (a, p), norm in zip(nl.terms, minus_norms):
        if a == 0:
            continue
        t = talenti(p + 1, n)
        d_exp = Fraction(2, n) + Fraction(2) / (p + 1) - 1
        o_exp = Fraction(1, n) + Fraction(1) / (p + 1) - Fraction(1, 2)
        scaled = pow_real(Interval.coerce(dm_volume), Interval(d_exp))
        base = Interval.coerce(norm) + pow_real(dom.volume, Interval(o_exp)) * t * rho
        total = total + Interval(a) * scaled * t.square() * pow_real(base, Interval(p - 1))
    return total


def compute_c2(nl: NonlinearityBound, dm_volume: Interval, dimension: int) -> Interval:
    """C2 = 1 - (lam / A_{1,N}) |D(m)|^(2/N); exactly 1 for lam = 0."""
    if nl.lam == 0:
        return Interval(1.0)
    ratio = Interval(nl.lam) / rfk_constant(dimension)
    return Interval(1.0) - ratio * pow_real(Interval.coerce(dm_volume), Interval(Fraction(2, dimension)))


@dataclass(frozen=True)
class LevelDiagnostic:
    """Everything evaluated at one candidate level m."""

    m: float
    plus_norm: Interval
    cq: Interval
    support_margin: Interval
    dm_volume: Interval
    eigen_lower: Interval
    minus_norms: tuple[Interval, ...]
    c1: Interval
    c2: Interval

    @property
    def support_ok(self) -> bool:
        return self.support_margin.lo > 0.0

    def eigen_ok(self, lam: Fraction) -> bool:
        return lam <= 0 or self.eigen_lower.lo > lam

    @property
    def comparison_ok(self) -> bool:
        return self.c1.hi < self.c2.lo

    def verified(self, lam: Fraction) -> bool:
        return self.support_ok and self.comparison_ok and self.eigen_ok(lam)

    @property
    def margin(self) -> float:
        """c2.lo - c1.hi rounded down."""
        return (Interval(self.c2.lo) - Interval(self.c1.hi)).lo


@dataclass(frozen=True)
class PositivityCertificate:
    verdict: str
    q: Fraction
    m: float
    rho: Interval
    nonlinearity: NonlinearityBound
    domain: DomainSpec
    chosen: LevelDiagnostic
    diagnostics: tuple[LevelDiagnostic, ...]
    assumptions: tuple[str, ...]

    @property
    def dm_volume(self) -> Interval:
        return self.chosen.dm_volume

    @property
    def eigen_lower(self) -> Interval:
        return self.chosen.eigen_lower

    @property
    def support_margin(self) -> Interval:
        return self.chosen.support_margin

    @property
    def c1(self) -> Interval:
        return self.chosen.c1

    @property
    def c2(self) -> Interval:
        return self.chosen.c2

    @property
    def margin(self) -> float:
        return self.chosen.margin

    def to_dict(self) -> dict:
        return certificate_to_dict(self)


def _level_candidates(m_candidates) -> tuple[float, ...]:
    if m_candidates is None:
        return DEFAULT_M_CANDIDATES
    values = tuple(float(m) for m in m_candidates)
    if not values:
        raise ConfigurationError("m_candidates must not be empty")
    if any(not m > 0.0 for m in values):
        raise DomainError("every candidate m must be positive")
    return values


def evaluate_level(mesh: CellMesh, dom: DomainSpec, nl: NonlinearityBound, rho, q, m) -> LevelDiagnostic:
    n = dom.dimension
    q = check_q(q, n)
    rho = Interval.coerce(rho)
    plus = plus_norm_lower(mesh, q, m)
    cq = lq_constant(q, dom)
    margin = plus - cq * rho
    dm = dm_vol_upper(mesh, m)
    norms = tuple(minus_norm_upper(mesh, p + 1) for _, p in nl.terms)
    return LevelDiagnostic(
        m=float(m),
        plus_norm=plus,
        cq=cq,
        support_margin=margin,
        dm_volume=dm,
        eigen_lower=eigen_lower_bound(dm, n),
        minus_norms=norms,
        c1=compute_c1(nl, dom, dm, norms, rho),
        c2=compute_c2(nl, dm, n),
    )


def certify_positivity(
    mesh: CellMesh,
    dom: DomainSpec,
    nl: NonlinearityBound,
    rho,
    q=2,
    m_candidates=None,
    rho_source: str = "user supplied",
) -> PositivityCertificate:
    """Run the positivity test over candidate levels m; keep the best margin.

    The verdict is VERIFIED_NONNEGATIVE when some m passes the support
    condition, the eigenvalue condition and C1 < C2.  Among passing levels
    the one with the largest C2.lo - C1.hi is reported; otherwise the
    certificate reports the most promising level and is INCONCLUSIVE.
    """
    if dom.dimension != mesh.dimension:
        raise DomainError(f"mesh dimension {mesh.dimension} differs from domain dimension {dom.dimension}")
    rho = Interval.coerce(rho)
    if rho.lo < 0.0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    q = check_q(q, dom.dimension)
    nl.check_subcritical(dom.dimension)
    levels = _level_candidates(m_candidates)
    diagnostics = tuple(evaluate_level(mesh, dom, nl, rho, q, m) for m in levels)
    passing = [d for d in diagnostics if d.verified(nl.lam)]
    if passing:
        chosen, verdict = max(passing, key=lambda d: d.margin), VERIFIED
    else:
        supported = [d for d in diagnostics if d.support_ok]
        pool = supported or diagnostics
        key = (lambda d: d.margin) if supported else (lambda d: d.support_margin.lo)
        chosen, verdict = max(pool, key=key), INCONCLUSIVE
    return PositivityCertificate(
        verdict=verdict,
        q=q,
        m=chosen.m,
        rho=rho,
        nonlinearity=nl,
        domain=dom,
        chosen=chosen,
        diagnostics=diagnostics,
        assumptions=_assumptions(mesh, dom, q, rho_source),
    )


def _assumptions(mesh: CellMesh, dom: DomainSpec, q: Fraction, rho_source: str) -> tuple[str, ...]:
    items = [
        "mesh coverage declared by its producer: the cells cover the closed domain "
        "and overlap only in sets of measure zero (not checked geometrically)",
        "cell bounds m_i <= u_hat <= M_i are rigorous on each closed cell, as supplied by the producer",
        f"error radius rho: {rho_source}",
        "the verdict proves u >= 0 (nonnegativity), not strict positivity",
        "a possibly disconnected supp u_minus is covered by the single global |D(m)| bound, "
        "which dominates every component",
        f"q = {q} taken from [2, p*+1)",
    ]
    if q == 2:
        items.append(f"C_2 from lambda_1 source: {lambda1_lower_bound(dom)[1]}")
    return tuple(items)


# ---------------------------------------------------------------------------
# serialisation


def _hex(iv: Interval) -> list[str]:
    return [iv.lo.hex(), iv.hi.hex()]


def _dec(iv: Interval, digits: int = 17) -> list[str]:
    return [format_lo(iv.lo, digits), format_hi(iv.hi, digits)]


def _eigen_field(iv: Interval):
    return "infinite" if is_infinite(iv) and iv.lo == MAX_FLOAT else _hex(iv)


def _level_to_dict(d: LevelDiagnostic, lam: Fraction) -> dict:
    return {
        "m": d.m.hex(),
        "m_decimal": repr(d.m),
        "support_ok": d.support_ok,
        "eigen_ok": d.eigen_ok(lam),
        "comparison_ok": d.comparison_ok,
        "verified": d.verified(lam),
        "plus_norm_lower": _hex(d.plus_norm),
        "cq": _hex(d.cq),
        "support_margin": _hex(d.support_margin),
        "dm_volume": _hex(d.dm_volume),
        "eigen_lower": _eigen_field(d.eigen_lower),
        "minus_norms": [_hex(v) for v in d.minus_norms],
        "c1": _hex(d.c1),
        "c2": _hex(d.c2),
    }


def certificate_to_dict(cert: PositivityCertificate) -> dict:
    c = cert.chosen
    lam = cert.nonlinearity.lam
    dom = cert.domain
    doc = {
        "format": CERT_FORMAT,
        "verdict": cert.verdict,
        "q": str(cert.q),
        "m": cert.m.hex(),
        "rho": _hex(cert.rho),
        "nonlinearity": cert.nonlinearity.to_dict(),
        "domain": {
            "dimension": dom.dimension,
            "volume": _hex(dom.volume),
            "lambda1_lower": None if dom.lambda1_lower is None else _hex(dom.lambda1_lower),
            "sides": None if dom.sides is None else [_hex(s) for s in dom.sides],
        },
        "dm_volume": _hex(c.dm_volume),
        "eigen_lower": _eigen_field(c.eigen_lower),
        "c1": _hex(c.c1),
        "c2": _hex(c.c2),
        "support_margin": _hex(c.support_margin),
        "margin": c.margin.hex(),
        "decimal": {
            "m": repr(c.m),
            "rho": _dec(cert.rho),
            "dm_volume": _dec(c.dm_volume),
            "eigen_lower": "infinite" if is_infinite(c.eigen_lower) and c.eigen_lower.lo == MAX_FLOAT else _dec(c.eigen_lower),
            "c1": _dec(c.c1),
            "c2": _dec(c.c2),
            "support_margin": _dec(c.support_margin),
            "margin": format_lo(c.margin, 17),
        },
        "assumptions": list(cert.assumptions),
        "levels": [_level_to_dict(d, lam) for d in cert.diagnostics],
    }
    return doc


def _read_pair(value) -> Interval:
    if value == "infinite":
        return INFINITE_EIGEN_BOUND
    return Interval.from_hex(value)


def recheck(doc: dict) -> bool:
    """Re-derive the verdict from the serialised fields alone.

    True when the stored verdict agrees with
    support_margin.lo > 0 and c1.hi < c2.lo and (lam <= 0 or eigen_lower.lo > lam).
    """
    lam = Fraction(doc["nonlinearity"]["lambda"])
    margin = _read_pair(doc["support_margin"])
    c1 = _read_pair(doc["c1"])
    c2 = _read_pair(doc["c2"])
    eig = _read_pair(doc["eigen_lower"])
    ok = margin.lo > 0.0 and c1.hi < c2.lo and (lam <= 0 or eig.lo > lam)
    return ok == (doc["verdict"] == VERIFIED)


__all__ = [
    "CERT_FORMAT",
    "DEFAULT_M_CANDIDATES",
    "INCONCLUSIVE",
    "INFINITE_EIGEN_BOUND",
    "VERIFIED",
    "LevelDiagnostic",
    "NonlinearityBound",
    "PositivityCertificate",
    "certificate_to_dict",
    "certify_positivity",
    "check_q",
    "compute_c1",
    "compute_c2",
    "eigen_lower_bound",
    "evaluate_level",
    "is_infinite",
    "recheck",
    "support_condition",
]
