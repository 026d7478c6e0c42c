"""Newton-Kantorovich existence radii and Lipschitz constants.

With alpha >= ||F'(u_hat)^-1|| ||F(u_hat)|| and beta >= ||F'(u_hat)^-1|| L,
alpha beta <= 1/2 gives a solution u with ||u - u_hat|| <= rho for every
rho in [rho_minus, 2 alpha], rho_minus = (1 - sqrt(1 - 2 alpha beta)) / beta,
unique in the closed ball of radius 2 alpha.

rho_minus is evaluated as 2 alpha / (1 + sqrt(1 - 2 alpha beta)), which is
the same number without the cancellation in the numerator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .constants import DomainSpec, embedding_const, poincare_c2
from .errors import DomainError
from .interval import Interval, format_hi, format_lo, sqrt

NK_FORMAT = "nk-report/1"
HALF = Interval(0.5)


def _positive(name: str, value) -> Interval:
    iv = Interval.coerce(value)
    if not (iv.lo >= 0.0 and iv.hi > 0.0):
        raise DomainError(f"{name} must be positive, got {iv}")
    return iv


@dataclass(frozen=True)
class NKInput:
    """Upper bounds for ||F'(u_hat)^-1||, the dual residual norm, and L."""

    inv_norm: Interval
    residual: Interval
    lipschitz: Interval
    provenance: str = "user supplied"

    def __post_init__(self):
        object.__setattr__(self, "inv_norm", _positive("inv_norm", self.inv_norm))
        object.__setattr__(self, "residual", _positive("residual", self.residual))
        object.__setattr__(self, "lipschitz", _positive("lipschitz", self.lipschitz))


@dataclass(frozen=True)
class NKReport:
    alpha: Interval
    beta: Interval
    alpha_beta: Interval
    rho_min: Interval | None
    rho_max: Interval
    uniqueness_radius: Interval
    feasible: bool
    provenance: str = "user supplied"

    def admits(self, rho, slack: float = 0.0) -> bool:
        """True when rho lies in [rho_min.hi, rho_max.lo], each end relaxed by ``slack`` relative."""
        if not self.feasible:
            return False
        rho = Interval.coerce(rho)
        return rho.lo >= self.rho_min.hi * (1.0 - slack) and rho.hi <= self.rho_max.lo * (1.0 + slack)

    def to_dict(self) -> dict:
        return report_to_dict(self)


def nk_from_alpha_beta(alpha, beta, provenance: str = "user supplied") -> NKReport:
    alpha = _positive("alpha", alpha)
    beta = _positive("beta", beta)
    product = alpha * beta
    feasible = product.hi <= 0.5
    two_alpha = alpha * 2.0
    rho_min = None
    if feasible:
        disc = Interval(1.0) - product * 2.0
        # the exact discriminant is >= 0 once alpha beta <= 1/2
        disc = Interval(max(disc.lo, 0.0), max(disc.hi, 0.0))
        rho_min = two_alpha / (Interval(1.0) + sqrt(disc))
    return NKReport(
        alpha=alpha,
        beta=beta,
        alpha_beta=product,
        rho_min=rho_min,
        rho_max=two_alpha,
        uniqueness_radius=two_alpha,
        feasible=feasible,
        provenance=provenance,
    )


def nk_radius(inp: NKInput) -> NKReport:
    """alpha = inv_norm * residual, beta = inv_norm * lipschitz, then the radii."""
    return nk_from_alpha_beta(inp.inv_norm * inp.residual, inp.inv_norm * inp.lipschitz, inp.provenance)


def check_rho(report: NKReport, rho, slack: float = 0.0) -> bool:
    return report.admits(rho, slack)


def next_float_up(x: float) -> float:
    """Smallest float strictly above x."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"next_float_up needs a finite number, got {x}")
    return math.nextafter(x, math.inf)


def dual_residual_from_l2(residual_l2, dom: DomainSpec) -> Interval:
    """||F(u_hat)||_{H^-1} <= C_2 ||F(u_hat)||_{L^2}."""
    return poincare_c2(dom) * _positive("residual", residual_l2)


LIPSCHITZ_KINDS = ("lane_emden", "allen_cahn", "nagumo", "lions")


def lipschitz_bound(kind: str, dom: DomainSpec, uhat_norm, r, **params) -> Interval:
    """Lipschitz constant of F' on the ball of radius r around u_hat.

    ``uhat_norm`` bounds ||u_hat||_{L^(p+1)} for lane_emden and ||u_hat||_{L^4}
    otherwise.  Parameters: lane_emden p; allen_cahn lam; nagumo lam, a;
    lions lam, A, B.
    """
    norm = Interval.coerce(uhat_norm)
    r = Interval.coerce(r)
    if norm.lo < 0.0 or r.lo < 0.0:
        raise DomainError("uhat_norm and r must be nonnegative")
    if kind == "lane_emden":
        p = Fraction(params["p"])
        if p < 2:
            raise DomainError(f"the Lane-Emden Lipschitz bound needs p >= 2, got {p}")
        c = embedding_const(p + 1, dom)
        factor = Interval(p * (p - 1)) * c**3
        if p == 2:
            return factor
        base = norm + c * r
        return factor * (base ** int(p - 2) if (p - 2).denominator == 1 else base ** Interval(p - 2))
    c4 = embedding_const(4, dom)
    quartic = Interval(6.0) * c4**3 * (norm + c4 * r)
    lam = Interval(Fraction(params.get("lam", 1)))
    if kind == "allen_cahn":
        return lam * quartic
    if kind == "nagumo":
        a = Interval(Fraction(params["a"]))
        return lam * (Interval(2.0) * (Interval(1.0) + a) * embedding_const(3, dom) ** 3 + quartic)
    if kind == "lions":
        big_a = Interval(Fraction(params["A"]))
        big_b = Interval(Fraction(params.get("B", 1)))
        return lam * (Interval(2.0) * big_a * embedding_const(3, dom) ** 3 + big_b * quartic)
    raise DomainError(f"unknown nonlinearity kind {kind!r}; expected one of {LIPSCHITZ_KINDS}")


def _pair(iv: Interval | None):
    return None if iv is None else [iv.lo.hex(), iv.hi.hex()]


def _dec(iv: Interval | None):
    return None if iv is None else [format_lo(iv.lo, 17), format_hi(iv.hi, 17)]


def report_to_dict(report: NKReport, rho=None) -> dict:
    names = ("alpha", "beta", "alpha_beta", "rho_min", "rho_max", "uniqueness_radius")
    doc = {"format": NK_FORMAT, "feasible": report.feasible, "provenance": report.provenance}
    for name in names:
        doc[name] = _pair(getattr(report, name))
    doc["decimal"] = {name: _dec(getattr(report, name)) for name in names}
    if rho is not None:
        rho = Interval.coerce(rho)
        doc["check_rho"] = {"rho": _pair(rho), "admissible": report.admits(rho)}
    return doc


__all__ = [
    "LIPSCHITZ_KINDS",
    "NK_FORMAT",
    "NKInput",
    "NKReport",
    "check_rho",
    "dual_residual_from_l2",
    "lipschitz_bound",
    "next_float_up",
    "nk_from_alpha_beta",
    "nk_radius",
    "report_to_dict",
]
