import json
import math
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from oracles import FOUR_CELL_ORACLE, c1_term_mp, encloses, level_oracle, rfk_mp, rho_monotonicity_violations
from posicert.certify import (
    CERT_FORMAT,
    DEFAULT_M_CANDIDATES,
    INCONCLUSIVE,
    VERIFIED,
    NonlinearityBound,
    certify_positivity,
    check_q,
    compute_c1,
    compute_c2,
    eigen_lower_bound,
    is_infinite,
    recheck,
    support_condition,
)
from posicert.constants import DomainSpec, poincare_c2, rfk_constant
from posicert.errors import ConfigurationError, DomainError
from posicert.field import CellMesh, load_mesh
from posicert.interval import Interval, format_hi, format_lo

SQUARE = DomainSpec.unit_square()

@pytest.fixture(scope="module")
def four_cells():
    return load_mesh("samples/four_cells.json")


@pytest.fixture(scope="module")
def four_cell_cert(four_cells):
    return certify_positivity(four_cells, SQUARE, NonlinearityBound(0, ((1, 3),)), Interval("0.1"))


def _close(iv: Interval, text: str, rel: float = 1e-15) -> bool:
    value = mpf(text)
    return mpf(iv.lo) - rel * abs(value) <= value <= mpf(iv.hi) + rel * abs(value)


def test_four_cell_verdict(four_cell_cert):
    assert four_cell_cert.verdict == VERIFIED
    assert four_cell_cert.m == 0.25
    assert four_cell_cert.c2 == Interval(1.0)
    assert four_cell_cert.dm_volume == Interval(0.75)


@pytest.mark.parametrize("m", [0.5, 0.25])
def test_four_cell_levels_match_hand_values(four_cell_cert, m):
    level = next(d for d in four_cell_cert.diagnostics if d.m == m)
    oracle = FOUR_CELL_ORACLE[m]
    # the hand values use exact decimals; the mesh holds them rounded outward to binary64
    assert _close(level.plus_norm, oracle["plus"])
    assert _close(level.support_margin, oracle["margin"], 1e-13)
    assert _close(level.dm_volume, oracle["dm"], 0.0)
    assert _close(level.c1, oracle["c1"])
    assert level.verified(Fraction(0))


def test_four_cell_levels_match_mpmath(four_cells, four_cell_cert):
    lows = [c.lower for c in four_cells.cells]
    ups = [c.upper for c in four_cells.cells]
    vols = [c.volume.lo for c in four_cells.cells]
    for level in four_cell_cert.diagnostics:
        ref = level_oracle(lows, ups, vols, level.m, 2, Interval("0.1").hi, 1 / mpmath.sqrt(2 * mpmath.pi**2), [(1, 3)])
        assert encloses(level.plus_norm, ref["plus"])
        assert encloses(level.dm_volume, ref["dm"])
        assert encloses(level.c2, ref["c2"])
        # rho is the outward enclosure of 0.1, so its upper end is one of the enclosed values
        assert encloses(level.c1, ref["c1"])
        assert encloses(level.support_margin, ref["margin"])


def test_four_cell_support_fails_below_quarter(four_cell_cert):
    for d in four_cell_cert.diagnostics:
        assert d.support_ok == (d.m >= 0.25)


def _ceil_digits(value, digits):
    return Decimal(mpmath.nstr(value, 40)).normalize(Context(prec=digits, rounding=ROUND_CEILING))


def _floor_digits(value, digits):
    return Decimal(mpmath.nstr(value, 40)).normalize(Context(prec=digits, rounding=ROUND_FLOOR))


def test_four_cell_printed_digits(four_cell_cert):
    c1 = mpf(FOUR_CELL_ORACLE[0.25]["c1"])
    margin = mpf(FOUR_CELL_ORACLE[0.25]["margin"])
    assert Decimal(format_hi(four_cell_cert.c1.hi, 7)) == _ceil_digits(c1, 7)
    assert Decimal(format_lo(four_cell_cert.support_margin.lo, 9)) == _floor_digits(margin, 9)
    assert format_lo(four_cell_cert.c2.lo, 7) == "1"


# -- support condition ---------------------------------------------------------------


def test_support_condition_with_zero_rho():
    mesh = CellMesh.from_bounds([0.2, 0.3], [0.25, 0.4], [0.5, 0.5])
    assert support_condition(mesh, SQUARE, 2, 0.5, 0).lo > 0.0


def test_support_condition_unit_square():
    mesh = CellMesh.from_bounds([0.5], [0.5], [1])
    margin = support_condition(mesh, SQUARE, 2, 0.5, 1)
    assert encloses(margin, mpf("0.5") - 1 / mpmath.sqrt(2 * mpmath.pi**2))
    assert margin.lo > 0.0


def test_support_condition_fails_without_plus_part():
    mesh = CellMesh.from_bounds([0.2, 0.3], [0.25, 0.4], [0.5, 0.5])
    assert support_condition(mesh, SQUARE, 2, 0.1, 0.01).lo <= 0.0


def test_support_condition_with_talenti_constant():
    mesh = CellMesh.from_bounds([0.5], [0.5], [1])
    margin = support_condition(mesh, SQUARE, 4, 0.5, 1)
    assert encloses(margin, mpf("0.5") - 1 / mpmath.pi)


@pytest.mark.parametrize("q,n", [(1, 2), (Fraction(3, 2), 2), (6, 3), (7, 3)])
def test_q_range(q, n):
    with pytest.raises(DomainError):
        check_q(q, n)


def test_q_range_accepts_edges():
    assert check_q(2, 3) == 2
    assert check_q(Fraction(59, 10), 3) == Fraction(59, 10)
    assert check_q(100, 2) == 100


# -- eigenvalue bound -------------------------------------------------------------------


def test_eigen_bound_unit_volume():
    assert eigen_lower_bound(Interval(1), 2).lo >= 18.1684145355


def test_eigen_bound_small_volume():
    got = eigen_lower_bound(Interval("0.0560531"), 2)
    assert got.lo >= 324.128
    assert encloses(got, rfk_mp(2) / mpf("0.0560531"))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_eigen_bound_other_dimensions(n):
    got = eigen_lower_bound(Interval(Fraction(1, 8)), n)
    assert encloses(got, rfk_mp(n) * mpf(8) ** (mpf(2) / n))


def test_eigen_bound_empty_set():
    assert is_infinite(eigen_lower_bound(Interval(0.0), 2))
    partly = eigen_lower_bound(Interval(0.0, 0.5), 2)
    assert partly.hi == math.inf and partly.lo >= 36.3


# -- C1 and C2 -------------------------------------------------------------------------------


def test_c1_without_terms():
    assert compute_c1(NonlinearityBound.allen_cahn(100), SQUARE, Interval(0.3), (), 0.01) == Interval(0.0)


def test_c1_zero_base():
    nl = NonlinearityBound.lane_emden(3)
    assert compute_c1(nl, SQUARE, Interval(0.3), (Interval(0.0),), 0) == Interval(0.0)


@pytest.mark.parametrize(
    "nl",
    [NonlinearityBound.lions(10, 5), NonlinearityBound.nagumo(400, Fraction(1, 4)), NonlinearityBound.lane_emden(5)],
)
def test_c1_matches_mpmath(nl):
    dom = DomainSpec.hyperrectangle([1, 2])
    dm, norm, rho = Interval("0.0625"), Interval("0.003"), Interval("1e-4")
    got = compute_c1(nl, dom, dm, (norm,) * len(nl.terms), rho)
    ref = sum(c1_term_mp(a, p, 2, 2, mpf("0.0625"), mpf("0.003"), mpf("1e-4")) for a, p in nl.terms)
    assert encloses(got, ref)
    assert got.width() < 1e-12 * got.mid()


def test_c1_in_three_dimensions():
    nl = NonlinearityBound.lane_emden(3)
    dom = DomainSpec.unit_cube(3)
    got = compute_c1(nl, dom, Interval(Fraction(1, 4)), (Interval(Fraction(1, 100)),), Interval(Fraction(1, 1000)))
    assert encloses(got, c1_term_mp(1, 3, 3, 1, mpf(1) / 4, mpf(1) / 100, mpf(1) / 1000))


def test_c2_lambda_zero_is_exactly_one():
    assert compute_c2(NonlinearityBound.lane_emden(3), Interval(0.7), 2) == Interval(1.0)


@pytest.mark.parametrize("lam,eig,printed", [("100", "324.128275", "0.6914802"), ("10", "47.9974691", "0.7916557")])
def test_c2_from_printed_eigen_bound(lam, eig, printed):
    # dm chosen so that A_{1,2} / dm equals the printed eigenvalue bound
    dm = rfk_constant(2) / Interval(Fraction(eig))
    c2 = compute_c2(NonlinearityBound.allen_cahn(Fraction(lam)), dm, 2)
    assert abs(c2.mid() - float(printed)) <= 1e-6 * float(printed)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 1.0), st.integers(1, 500), st.sampled_from([2, 3, 4, 5]))
def test_c2_identity(dm, lam, n):
    dm = Interval(dm)
    c2 = compute_c2(NonlinearityBound.allen_cahn(lam), dm, n)
    other = Interval(1.0) - Interval(lam) / eigen_lower_bound(dm, n)
    assert c2.lo <= other.hi and other.lo <= c2.hi
    assert abs(c2.mid() - other.mid()) <= 1e-12 * max(1.0, abs(c2.mid()))


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.sampled_from(["lions", "lane_emden", "nagumo"]))
def test_anti_monotone_in_dm(a, b, kind):
    small, large = Interval(min(a, b)), Interval(max(a, b))
    nl = {
        "lions": NonlinearityBound.lions(10, 5),
        "lane_emden": NonlinearityBound.lane_emden(3, 5),
        "nagumo": NonlinearityBound.nagumo(20, Fraction(1, 4)),
    }[kind]
    norms = (Interval(0.01),) * len(nl.terms)
    assert compute_c1(nl, SQUARE, small, norms, 0.01).hi <= compute_c1(nl, SQUARE, large, norms, 0.01).hi
    assert compute_c2(nl, large, 2).lo <= compute_c2(nl, small, 2).lo


# -- nonlinearity bounds --------------------------------------------------------------------


def test_presets():
    assert NonlinearityBound.lane_emden(3).terms == ((1, 3),)
    assert NonlinearityBound.allen_cahn(100).terms == ()
    nag = NonlinearityBound.nagumo(400, Fraction(1, 4))
    assert nag.lam == 0 and nag.terms == ((500, 2),)
    lions = NonlinearityBound.lions(10, 5)
    assert lions.lam == 10 and lions.terms == ((50, 2),)


def test_nonlinearity_validation():
    with pytest.raises(DomainError):
        NonlinearityBound(0, ((-1, 2),))
    with pytest.raises(DomainError):
        NonlinearityBound(0, ((1, 1),))
    with pytest.raises(DomainError):
        NonlinearityBound.lane_emden(5).check_subcritical(3)
    NonlinearityBound.lane_emden(4).check_subcritical(3)
    NonlinearityBound.lane_emden(50).check_subcritical(2)


# -- end to end -------------------------------------------------------------------------------


def test_constant_field_has_no_plus_part_below_its_value():
    # every upper bound is 1 > m, so the plus-norm bound on D(m) is 0 and the support condition fails
    mesh = CellMesh.from_bounds([1.0] * 4, [1.0] * 4, [0.25] * 4)
    cert = certify_positivity(mesh, SQUARE, NonlinearityBound.allen_cahn(100), 0.01, m_candidates=[2**-4])
    assert cert.verdict == INCONCLUSIVE
    assert cert.dm_volume == Interval(0.0) and is_infinite(cert.eigen_lower)
    assert cert.c1 == Interval(0.0) and cert.c2 == Interval(1.0)
    assert not cert.chosen.support_ok


def test_constant_field_at_its_own_level():
    mesh = CellMesh.from_bounds([1.0] * 4, [1.0] * 4, [0.25] * 4)
    cert = certify_positivity(mesh, SQUARE, NonlinearityBound.lane_emden(3), 0.01, m_candidates=[1.0])
    assert cert.verdict == VERIFIED
    assert encloses(cert.support_margin, 1 - mpf(0.01) / mpmath.sqrt(2 * mpmath.pi**2))


def test_nearly_constant_field_with_allen_cahn():
    mesh = CellMesh.from_bounds([1.0] * 15 + [0.05], [1.0] * 15 + [0.06], [Fraction(1, 16)] * 16)
    cert = certify_positivity(mesh, SQUARE, NonlinearityBound.allen_cahn(100), 1e-3)
    assert cert.verdict == VERIFIED
    assert cert.eigen_lower.lo > 100
    assert cert.m in DEFAULT_M_CANDIDATES and cert.m >= 0.06


def test_inflated_rho_is_inconclusive(four_cells):
    cert = certify_positivity(four_cells, SQUARE, NonlinearityBound(0, ((1, 3),)), 1e5)
    assert cert.verdict == INCONCLUSIVE
    assert not any(d.support_ok for d in cert.diagnostics)


def test_large_lambda_fails_the_eigen_condition(four_cells):
    cert = certify_positivity(four_cells, SQUARE, NonlinearityBound.allen_cahn(1000), 0.001)
    assert cert.verdict == INCONCLUSIVE
    assert any(d.support_ok and not d.eigen_ok(Fraction(1000)) for d in cert.diagnostics)


def test_configuration_errors(four_cells):
    nl = NonlinearityBound.lane_emden(3)
    with pytest.raises(ConfigurationError):
        certify_positivity(four_cells, SQUARE, nl, 0.1, m_candidates=[])
    with pytest.raises(DomainError):
        certify_positivity(four_cells, SQUARE, nl, -0.1)
    with pytest.raises(DomainError):
        certify_positivity(four_cells, DomainSpec.unit_cube(3), nl, 0.1)
    with pytest.raises(DomainError):
        certify_positivity(four_cells, SQUARE, nl, 0.1, m_candidates=[0.0])


def test_rho_monotonicity_sample():
    bad, verified = rho_monotonicity_violations(120, seed=5)
    assert bad == []
    assert verified > 10


# -- serialisation ----------------------------------------------------------------------------


def test_certificate_json_round_trip(four_cell_cert):
    doc = json.loads(json.dumps(four_cell_cert.to_dict()))
    assert doc["format"] == CERT_FORMAT and doc["verdict"] == VERIFIED
    assert Interval.from_hex(doc["c1"]) == four_cell_cert.c1
    assert Interval.from_hex(doc["support_margin"]) == four_cell_cert.support_margin
    assert Interval.from_hex(doc["dm_volume"]) == four_cell_cert.dm_volume
    assert float.fromhex(doc["m"]) == 0.25
    assert len(doc["levels"]) == len(DEFAULT_M_CANDIDATES)
    assert any("nonnegativity" in a for a in doc["assumptions"])
    assert any("coverage" in a for a in doc["assumptions"])


def test_recheck(four_cell_cert):
    doc = four_cell_cert.to_dict()
    assert recheck(doc)
    tampered = dict(doc, c1=[doc["c2"][0], doc["c2"][1]])
    assert not recheck(tampered)
    assert not recheck(dict(doc, verdict=INCONCLUSIVE))


def test_infinite_eigen_bound_serialises():
    mesh = CellMesh.from_bounds([1.0] * 4, [1.0] * 4, [0.25] * 4)
    doc = certify_positivity(mesh, SQUARE, NonlinearityBound.allen_cahn(5), 0.01, m_candidates=[0.5]).to_dict()
    assert doc["eigen_lower"] == "infinite"
    assert recheck(doc)


def test_poincare_constant_is_used_for_q_two(four_cell_cert):
    assert four_cell_cert.chosen.cq == poincare_c2(SQUARE)
