"""posicert command line.

Exit codes: 0 success (verified certificate, feasible NK report, tables,
zero enclosures), 10 inconclusive positivity test, 11 failed
Newton-Kantorovich check, 2 bad input or any other error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .certify import (
    VERIFIED,
    NonlinearityBound,
    PositivityCertificate,
    certify_positivity,
    is_infinite,
)
from .constants import (
    DomainSpec,
    bessel_zero_for_dimension,
    embedding_const,
    lambda1_lower_bound,
    rfk_constant,
    talenti,
    talenti_range,
    unit_ball_volume,
)
from .errors import InputError, PosicertError
from .field import CellMesh, _load_json, cells_csv, legendre_from_dict, legendre_to_mesh, mesh_from_dict
from .interval import Interval, fixed_hi, fixed_lo, format_hi, format_lo, parse_exact
from .nk import NKInput, nk_from_alpha_beta, nk_radius, report_to_dict
from .special import first_zero

EXIT_OK = 0
EXIT_INCONCLUSIVE = 10
EXIT_NK_FAILED = 11
EXIT_INPUT = 2

PROBLEM_FORMAT = "problem/1"
DEFAULT_EMBED_ROWS = tuple(
    (p, n, vol) for n in (2, 3) for vol in (1, 2) for p in ((3, 4, 5, 6) if vol == 1 else (2, 3, 4, 5, 6))
)


# ---------------------------------------------------------------------------
# small parsers


def _interval_arg(text: str) -> Interval:
    try:
        return Interval(parse_exact(text.strip()))
    except (ValueError, ArithmeticError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_dims(text: str) -> list[int]:
    """'2..5', '2,3' or '' (no rows)."""
    text = text.strip()
    if not text:
        return []
    try:
        if ".." in text:
            first, last = text.split("..")
            return list(range(int(first), int(last) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension range {text!r}; use e.g. 2..5 or 2,3") from None


def parse_embed(text: str) -> tuple[Fraction, int, Fraction]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected p,N,volume, got {text!r}")
    try:
        return Fraction(parse_exact(parts[0])), int(parts[1]), Fraction(parse_exact(parts[2]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,N,volume, got {text!r}") from None


def _decimal_pair(iv: Interval, digits: int = 17) -> str:
    return f"[{format_lo(iv.lo, digits)}, {format_hi(iv.hi, digits)}]"


# ---------------------------------------------------------------------------
# constants


def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{float(x):g}"


def constants_tables(dims, embed_rows) -> dict:
    ball_rows = []
    for n in dims:
        ball_rows.append(
            {
                "N": n,
                "B_N": unit_ball_volume(n),
                "j": bessel_zero_for_dimension(n),
                "A_1N": rfk_constant(n),
            }
        )
    embed = []
    for p, n, vol in embed_rows:
        low, high = talenti_range(n)
        t = talenti(p, n) if p > low and (high is None or p <= high) else None
        dom = DomainSpec(n, Interval(vol))
        if p == 2:
            lam, source = lambda1_lower_bound(dom)
            c = Interval(1.0) / lam ** Interval(0.5)
        else:
            c, source = embedding_const(p, dom), "talenti"
        embed.append({"p": p, "N": n, "volume": vol, "T": t, "C": c, "C_source": source})
    return {"unit_ball": ball_rows, "embedding": embed}


def _render_constants(tables: dict) -> str:
    lines = []
    if tables["unit_ball"]:
        lines.append(f"{'N':>2}  {'B_N':<30}{'j_(N/2-1),1':<30}{'A_1,N':<32}")
        for row in tables["unit_ball"]:
            cells = [f"[{fixed_lo(row[k].lo, 10)}, {fixed_hi(row[k].hi, 10)}]" for k in ("B_N", "j", "A_1N")]
            lines.append(f"{row['N']:>2}  {cells[0]:<30}{cells[1]:<30}{cells[2]:<32}")
    if tables["embedding"]:
        if lines:
            lines.append("")
        lines.append(f"{'N':>2} {'|Omega|':>8} {'p':>4}  {'T_p,N <=':<14}{'C_p <=':<14}source")
        for row in tables["embedding"]:
            t = "n/a" if row["T"] is None else fixed_hi(row["T"].hi, 8)
            lines.append(
                f"{row['N']:>2} {_frac_text(row['volume']):>8} {_frac_text(row['p']):>4}  "
                f"{t:<14}{fixed_hi(row['C'].hi, 8):<14}{row['C_source']}"
            )
    return "\n".join(line.rstrip() for line in lines)


def _constants_json(tables: dict) -> dict:
    def pair(iv):
        return None if iv is None else {"hex": [iv.lo.hex(), iv.hi.hex()], "decimal": [format_lo(iv.lo, 17), format_hi(iv.hi, 17)]}

    return {
        "format": "constants-table/1",
        "unit_ball": [
            {"N": r["N"], "B_N": pair(r["B_N"]), "j": pair(r["j"]), "A_1N": pair(r["A_1N"])} for r in tables["unit_ball"]
        ],
        "embedding": [
            {
                "p": str(r["p"]),
                "N": r["N"],
                "volume": str(r["volume"]),
                "T": pair(r["T"]),
                "C": pair(r["C"]),
                "C_source": r["C_source"],
            }
            for r in tables["embedding"]
        ],
    }


def cmd_constants(args) -> int:
    rows = args.embed if args.embed is not None else list(DEFAULT_EMBED_ROWS)
    tables = constants_tables(args.dims, rows)
    if args.json:
        print(json.dumps(_constants_json(tables), indent=1))
    else:
        text = _render_constants(tables)
        if text:
            print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# problem files and certify


def _point(value, where: str) -> Interval:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction, str, float)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    try:
        return Interval(parse_exact(value) if isinstance(value, str) else value)
    except (ValueError, ArithmeticError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _exact(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction, str)):
        raise InputError(f"{where}: expected an exact number, got {value!r}")
    try:
        return Fraction(parse_exact(value) if isinstance(value, str) else value)
    except (ValueError, ArithmeticError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _domain_from(raw, default_unit_square: bool) -> DomainSpec:
    if raw is None:
        if default_unit_square:
            return DomainSpec.unit_square()
        raise InputError("domain: missing object")
    if not isinstance(raw, dict):
        raise InputError("domain: expected an object")
    try:
        dimension = int(raw["dimension"])
    except (KeyError, TypeError, ValueError):
        raise InputError("domain.dimension: missing or not an integer") from None
    kwargs = {"allow_rfk_fallback": bool(raw.get("allow_rfk_fallback", True))}
    lam = raw.get("lambda1")
    if lam is not None:
        if isinstance(lam, dict):
            kwargs["lambda1_lower"] = _point(lam.get("value"), "domain.lambda1.value")
            kwargs["lambda1_source"] = str(lam.get("source", "explicit"))
        else:
            kwargs["lambda1_lower"] = _point(lam, "domain.lambda1")
    try:
        if "sides" in raw:
            sides = [_point(s, f"domain.sides[{i}]") for i, s in enumerate(raw["sides"])]
            dom = DomainSpec.hyperrectangle(sides, **kwargs)
            if len(sides) != dimension:
                raise InputError("domain.sides: one length per dimension expected")
            return dom
        if "volume" not in raw:
            raise InputError("domain.volume: missing")
        return DomainSpec(dimension, _point(raw["volume"], "domain.volume"), **kwargs)
    except PosicertError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"domain: {exc}") from None


def _nonlinearity_from(raw) -> NonlinearityBound:
    if not isinstance(raw, dict):
        raise InputError("nonlinearity: expected an object")
    preset = raw.get("preset")
    try:
        if preset is None:
            terms = raw.get("terms", [])
            if not isinstance(terms, list):
                raise InputError("nonlinearity.terms: expected an array of [a, p] pairs")
            pairs = []
            for i, t in enumerate(terms):
                if not isinstance(t, list) or len(t) != 2:
                    raise InputError(f"nonlinearity.terms[{i}]: expected [a, p]")
                pairs.append((_exact(t[0], f"nonlinearity.terms[{i}][0]"), _exact(t[1], f"nonlinearity.terms[{i}][1]")))
            return NonlinearityBound(_exact(raw.get("lambda", 0), "nonlinearity.lambda"), tuple(pairs))

        def par(name, default=None):
            if name not in raw:
                if default is None:
                    raise InputError(f"nonlinearity.{name}: required by preset {preset!r}")
                return default
            return _exact(raw[name], f"nonlinearity.{name}")

        if preset == "lane_emden":
            return NonlinearityBound.lane_emden(par("p"), par("lambda", Fraction(0)))
        if preset == "allen_cahn":
            return NonlinearityBound.allen_cahn(par("lambda"))
        if preset == "nagumo":
            return NonlinearityBound.nagumo(par("lambda"), par("a"))
        if preset == "lions":
            return NonlinearityBound.lions(par("lambda"), par("A"), par("B", Fraction(1)))
    except InputError:
        raise
    except PosicertError as exc:
        raise InputError(f"nonlinearity: {exc}") from None
    raise InputError(f"nonlinearity.preset: unknown preset {preset!r}")


def _resolve(base: Path, ref):
    if isinstance(ref, dict):
        return ref
    if not isinstance(ref, str):
        raise InputError(f"expected a path or an inline object, got {ref!r}")
    path = Path(ref)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise InputError(f"referenced file not found: {path}")
    return _load_json(path)


def load_problem(path) -> dict:
    """Parse a problem/1 file into the arguments of certify_positivity."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"problem file not found: {path}")
    raw = _load_json(path)
    if not isinstance(raw, dict) or raw.get("format") != PROBLEM_FORMAT:
        raise InputError(f"format: expected {PROBLEM_FORMAT!r}")
    base = path.parent
    has_mesh, has_legendre = "mesh" in raw, "legendre" in raw
    if has_mesh == has_legendre:
        raise InputError("exactly one of 'mesh' and 'legendre' must be given")
    if has_mesh:
        doc = _resolve(base, raw["mesh"])
        try:
            mesh = mesh_from_dict(doc)
        except InputError as exc:
            raise InputError(f"mesh.{exc}") from None
    else:
        doc = _resolve(base, raw["legendre"])
        try:
            mesh = legendre_to_mesh(legendre_from_dict(doc))
        except InputError as exc:
            raise InputError(f"legendre.{exc}") from None
    dom = _domain_from(raw.get("domain"), default_unit_square=has_legendre)
    nl = _nonlinearity_from(raw.get("nonlinearity"))
    rho_raw = raw.get("rho")
    if isinstance(rho_raw, dict):
        rho = _point(rho_raw.get("value"), "rho.value")
        source = str(rho_raw.get("source", "user supplied"))
    else:
        rho = _point(rho_raw, "rho")
        source = "user supplied"
    q = _exact(raw.get("q", 2), "q")
    ms = raw.get("m_candidates")
    if ms is not None:
        if not isinstance(ms, list):
            raise InputError("m_candidates: expected an array")
        ms = [_point(m, f"m_candidates[{i}]").lo for i, m in enumerate(ms)]
    return {"mesh": mesh, "dom": dom, "nl": nl, "rho": rho, "q": q, "m_candidates": ms, "rho_source": source}


def _eigen_text(iv: Interval) -> str:
    return "infinite (D(m) empty)" if is_infinite(iv) else format_lo(iv.lo, 9)


def render_report(cert: PositivityCertificate, mesh: CellMesh | None = None) -> str:
    c = cert.chosen
    nl = cert.nonlinearity
    terms = ", ".join(f"({a}, {p})" for a, p in nl.terms) or "none"
    lines = [
        "positivity test",
        f"  nonlinearity        {nl.name}  lambda = {nl.lam}  terms (a, p) = {terms}",
        f"  domain              N = {cert.domain.dimension}  |Omega| <= {format_hi(cert.domain.volume.hi, 9)}",
    ]
    if mesh is not None:
        lines.append(f"  mesh                {len(mesh)} cells")
    lines += [
        f"  q                   {cert.q}",
        f"  rho                 {format_hi(cert.rho.hi, 9)}",
        f"  m                   {c.m!r}",
        f"  |supp u_-| <=       {format_hi(c.dm_volume.hi, 9)}",
        f"  lambda_1(supp u_-) >= {_eigen_text(c.eigen_lower)}",
        f"  support margin >=   {format_lo(c.support_margin.lo, 9)}",
        f"  C1 <=               {format_hi(c.c1.hi, 7)}",
        f"  C2 >=               {format_lo(c.c2.lo, 7)}",
        f"  verdict             {cert.verdict}",
        "",
        "per-level diagnostics",
        f"  {'m':<12}{'support':<10}{'eigen':<8}{'C1<C2':<8}{'support margin':<18}{'|D(m)| <=':<14}{'C1 <=':<14}{'C2 >=':<14}",
    ]
    for d in cert.diagnostics:
        lines.append(
            f"  {d.m!r:<12}{'ok' if d.support_ok else 'fail':<10}{'ok' if d.eigen_ok(nl.lam) else 'fail':<8}"
            f"{'ok' if d.comparison_ok else 'fail':<8}{format_lo(d.support_margin.lo, 6):<18}"
            f"{format_hi(d.dm_volume.hi, 6):<14}{format_hi(d.c1.hi, 6):<14}{format_lo(d.c2.lo, 6):<14}"
        )
    lines.append("")
    lines.append("assumptions")
    lines += [f"  - {a}" for a in cert.assumptions]
    return "\n".join(lines)


def cmd_certify(args) -> int:
    problem = load_problem(args.problem)
    cert = certify_positivity(
        problem["mesh"],
        problem["dom"],
        problem["nl"],
        problem["rho"],
        q=problem["q"],
        m_candidates=problem["m_candidates"],
        rho_source=problem["rho_source"],
    )
    doc = cert.to_dict()
    if args.output:
        Path(args.output).write_text(json.dumps(doc, indent=1) + "\n")
    report = render_report(cert, problem["mesh"])
    if args.report:
        Path(args.report).write_text(report + "\n")
    if args.cells_csv:
        Path(args.cells_csv).write_text(cells_csv(problem["mesh"]))
    print(report)
    return EXIT_OK if cert.verdict == VERIFIED else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# nk


def cmd_nk(args) -> int:
    direct = args.alpha is not None or args.beta is not None
    derived = any(v is not None for v in (args.inv_norm, args.residual, args.lipschitz))
    if direct == derived:
        raise InputError("give either --alpha and --beta, or --inv-norm, --residual and --lipschitz")
    if direct:
        if args.alpha is None or args.beta is None:
            raise InputError("--alpha and --beta must be given together")
        report = nk_from_alpha_beta(args.alpha, args.beta, args.provenance)
    else:
        if None in (args.inv_norm, args.residual, args.lipschitz):
            raise InputError("--inv-norm, --residual and --lipschitz must be given together")
        report = nk_radius(NKInput(args.inv_norm, args.residual, args.lipschitz, args.provenance))
    doc = report_to_dict(report, args.check_rho)
    if args.json:
        print(json.dumps(doc, indent=1))
    else:
        print(f"alpha       <= {format_hi(report.alpha.hi, 9)}")
        print(f"beta        <= {format_hi(report.beta.hi, 9)}")
        print(f"alpha*beta  <= {format_hi(report.alpha_beta.hi, 9)}")
        print(f"feasible       {'true' if report.feasible else 'false'}")
        if report.feasible:
            print(f"rho_min     <= {format_hi(report.rho_min.hi, 9)}")
            print(f"2 alpha     >= {format_lo(report.rho_max.lo, 9)}")
        if args.check_rho is not None:
            verdict = "admissible" if doc["check_rho"]["admissible"] else "not admissible"
            print(f"rho {format_hi(args.check_rho.hi, 9)}: {verdict}")
    if not report.feasible:
        return EXIT_NK_FAILED
    if args.check_rho is not None and not doc["check_rho"]["admissible"]:
        return EXIT_NK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# bessel-zero


def cmd_bessel_zero(args) -> int:
    enc = first_zero(args.order, args.tol)
    if args.json:
        doc = {
            "format": "bessel-zero/1",
            "order": str(enc.order),
            "zero": [enc.zero.lo.hex(), enc.zero.hi.hex()],
            "zero_decimal": [format_lo(enc.zero.lo, 17), format_hi(enc.zero.hi, 17)],
            "function": enc.function,
            "f_lo": [enc.f_lo.lo.hex(), enc.f_lo.hi.hex()],
            "f_hi": [enc.f_hi.lo.hex(), enc.f_hi.hi.hex()],
            "signs_certified": enc.signs_certified(),
            "exact": enc.exact,
            "notes": list(enc.notes),
        }
        print(json.dumps(doc, indent=1))
        return EXIT_OK
    print(f"first positive zero of J_{enc.order}")
    print(f"  zero in      {_decimal_pair(enc.zero)}")
    print(f"  width        {enc.zero.width():.3e}")
    print(f"  f = {enc.function}")
    print(f"  f(lo) in     {_decimal_pair(enc.f_lo, 6)}")
    print(f"  f(hi) in     {_decimal_pair(enc.f_hi, 6)}")
    print(f"  opposite signs certified: {'yes' if enc.signs_certified() else 'no'}")
    if enc.window is not None:
        print(f"  monotone on  {_decimal_pair(enc.window)}  (f' in {_decimal_pair(enc.slope, 6)})")
    if enc.positive_on is not None:
        print(f"  no zero on   (0, {format_lo(enc.positive_on.hi, 17)}]")
    for note in enc.notes:
        print(f"  note: {note}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posicert", description="Interval-certified positivity checks for semilinear elliptic problems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="unit-ball, Bessel-zero, Faber-Krahn and embedding constant tables")
    p.add_argument("--dims", type=parse_dims, default=[2, 3, 4, 5], help="dimension range, e.g. 2..5 or 2,3 (empty for none)")
    p.add_argument("--embed", type=parse_embed, action="append", metavar="p,N,vol", help="embedding-constant row (repeatable)")
    p.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("certify", help="run the positivity test on a problem/1 file")
    p.add_argument("problem")
    p.add_argument("-o", "--output", help="certificate JSON path")
    p.add_argument("--report", help="also write the text report here")
    p.add_argument("--cells-csv", help="write cell bounds as CSV here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("nk", help="Newton-Kantorovich radii")
    p.add_argument("--alpha", type=_interval_arg)
    p.add_argument("--beta", type=_interval_arg)
    p.add_argument("--inv-norm", type=_interval_arg)
    p.add_argument("--residual", type=_interval_arg)
    p.add_argument("--lipschitz", type=_interval_arg)
    p.add_argument("--check-rho", type=_interval_arg)
    p.add_argument("--provenance", default="command line")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_nk)

    p = sub.add_parser("bessel-zero", help="certified first zero of J_order")
    p.add_argument("--order", required=True, help="0, 0.5, 1 or 1.5")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bessel_zero)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except (PosicertError, OSError, ValueError, ArithmeticError) as exc:
        print(f"posicert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
