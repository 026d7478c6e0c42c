"""Cellwise bounds of an approximate solution and the norms built from them.

A :class:`CellMesh` stores, for each cell K_i, an enclosure of its volume
and floats m_i <= min u_hat <= max u_hat <= M_i over the closed cell.  From
these we bound:

* the negative part: sup u_hat_minus, |supp u_hat_minus| and its L^p norm,
* |D(m)|, the volume of the sublevel set {u_hat <= m}, from above,
* the L^p norm of the positive part on D(m), from below,
* the L^p norm of u_hat itself, from above.

Tensor Legendre expansions on the unit square are turned into a mesh by
:func:`legendre_to_mesh`.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import ivarray as iv
from .errors import DomainError, InputError
from .interval import Interval, fraction_bounds, isum, parse_exact, pow_real

MESH_FORMAT = "cellmesh/1"
LEGENDRE_FORMAT = "legendre/1"
MAX_LEGENDRE_DEGREE = 80
DEFAULT_SUBDIVISION_DEPTH = 3


@dataclass(frozen=True, slots=True)
class Cell:
    volume: Interval
    lower: float
    upper: float
    id: int = 0

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise DomainError(f"cell {self.id}: lower {self.lower} exceeds upper {self.upper}")
        if not self.volume.lo > 0.0:
            raise DomainError(f"cell {self.id}: volume must be positive, got {self.volume}")


@dataclass(frozen=True)
class CellMesh:
    cells: tuple[Cell, ...]
    dimension: int
    declared_coverage: bool = True
    volume_units: str = "1"
    total_volume: Interval = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not self.cells:
            raise DomainError("a mesh needs at least one cell")
        object.__setattr__(self, "total_volume", isum(c.volume for c in self.cells))

    @classmethod
    def from_bounds(cls, lowers, uppers, volumes, dimension: int = 2) -> "CellMesh":
        """Build a mesh from parallel sequences; volumes may be numbers or intervals."""
        cells = [
            Cell(Interval.coerce(v), float(lo), float(hi), i)
            for i, (lo, hi, v) in enumerate(zip(lowers, uppers, volumes, strict=True))
        ]
        return cls(tuple(cells), dimension)

    def __len__(self) -> int:
        return len(self.cells)


# ---------------------------------------------------------------------------
# mesh reductions


def minus_sup_upper(mesh: CellMesh) -> Interval:
    """|min_i min(0, m_i)|, an upper bound of sup u_hat_minus."""
    worst = min(min(0.0, c.lower) for c in mesh.cells)
    return Interval(-worst) if worst < 0.0 else Interval(0.0)


def minus_support_vol_upper(mesh: CellMesh) -> Interval:
    """Sum of |K_i| over cells with m_i < 0."""
    return isum(c.volume for c in mesh.cells if c.lower < 0.0)


def _inverse(p) -> Interval:
    return Interval(1 / Fraction(p if not isinstance(p, str) else parse_exact(p)))


def _check_p(p) -> None:
    if not float(p) >= 1.0:
        raise DomainError(f"norm exponent must be >= 1, got {p}")


def _power(value: Interval, p) -> Interval:
    exact = Fraction(p)
    if exact.denominator == 1:
        return value ** int(exact)
    return pow_real(value, Interval(exact))


def minus_norm_upper(mesh: CellMesh, p) -> Interval:
    """sup u_hat_minus * |supp u_hat_minus|^(1/p), bounding ||u_hat_minus||_{L^p}."""
    _check_p(p)
    sup = minus_sup_upper(mesh)
    if sup.hi == 0.0:
        return Interval(0.0)
    return sup * pow_real(minus_support_vol_upper(mesh), _inverse(p))


def dm_vol_upper(mesh: CellMesh, m) -> Interval:
    """Sum of |K_i| over Lambda_m = {i : m_i <= m}, bounding |D(m)|."""
    m = float(m)
    return isum(c.volume for c in mesh.cells if c.lower <= m)


def plus_norm_lower(mesh: CellMesh, p, m) -> Interval:
    """(sum over {i : M_i <= m} of |K_i| max(0, m_i)^p)^(1/p); ``lo`` is the bound."""
    _check_p(p)
    m = float(m)
    terms = [
        Interval(c.volume.lo) * _power(Interval(c.lower), p)
        for c in mesh.cells
        if c.upper <= m and c.lower > 0.0
    ]
    if not terms:
        return Interval(0.0)
    return pow_real(isum(terms), _inverse(p))


def uhat_norm_upper(mesh: CellMesh, p) -> Interval:
    """(sum_i |K_i| max(|m_i|, |M_i|)^p)^(1/p); ``hi`` bounds ||u_hat||_{L^p}."""
    _check_p(p)
    terms = []
    for c in mesh.cells:
        top = max(abs(c.lower), abs(c.upper))
        if top > 0.0:
            terms.append(Interval(c.volume.hi) * _power(Interval(top), p))
    if not terms:
        return Interval(0.0)
    return pow_real(isum(terms), _inverse(p))


# ---------------------------------------------------------------------------
# discrete level-set problem


def _weight(value, q) -> Fraction | float:
    q_exact = Fraction(q)
    if q_exact.denominator == 1:
        return Fraction(value) ** int(q_exact)
    return float(value) ** float(q)


def greedy_max_levelset(values, volumes, q, c):
    """Total volume of the sublevel set built by taking smallest values first.

    Cells are added in increasing order of value while the weighted norm
    (sum v_i^q vol_i)^(1/q) stays <= c; the first cell that does not fit ends
    the set, mirroring a level set {u <= t}.
    """
    budget = _weight(c, q)
    used = 0
    total = 0
    for i in sorted(range(len(values)), key=lambda k: values[k]):
        cost = _weight(values[i], q) * _exact_number(volumes[i])
        if used + cost > budget:
            break
        used += cost
        total += _exact_number(volumes[i])
    return total


def oracle_max_levelset(values, volumes, q, c):
    """Largest total volume of a cell subset S with (sum_S v^q vol)^(1/q) <= c.

    Exhaustive search over all 2^n subsets; only for small test instances.
    Costs and volumes are scaled to integers so every subset sum is exact.
    """
    if len(values) > 20:
        raise DomainError("the brute-force oracle handles at most 20 cells")
    if len(values) != len(volumes):
        raise ValueError("values and volumes differ in length")
    budget = Fraction(_weight(c, q))
    costs = [Fraction(_weight(v, q)) * _exact_number(w) for v, w in zip(values, volumes)]
    vols = [_exact_number(w) for w in volumes]
    cost_den = math.lcm(budget.denominator, *(x.denominator for x in costs))
    vol_den = math.lcm(1, *(x.denominator for x in vols))
    int_costs = [int(x * cost_den) for x in costs]
    int_vols = [int(x * vol_den) for x in vols]
    limit = int(budget * cost_den)
    size = 1 << len(values)
    cost_sum = [0] * size
    vol_sum = [0] * size
    best = 0
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        cost_sum[mask] = cost_sum[mask ^ low] + int_costs[i]
        vol_sum[mask] = vol_sum[mask ^ low] + int_vols[i]
        if cost_sum[mask] <= limit and vol_sum[mask] > best:
            best = vol_sum[mask]
    return Fraction(best, vol_den)


def _exact_number(x):
    # floats convert to Fraction exactly, so sums below are order independent
    return x if isinstance(x, (int, Fraction)) else Fraction(x)


# ---------------------------------------------------------------------------
# Legendre tensor fields on the unit square


@dataclass(frozen=True)
class LegendreField:
    """u_hat(x, y) = sum_{i,j=1..M} u_ij phi_i(x) phi_j(y) on (0,1)^2.

    phi_n(x) = x(1-x) Q_n'(x) / (n(n+1)) with Q_n the shifted Legendre
    polynomial; equivalently (P_(n-1)(t) - P_(n+1)(t)) / (2(2n+1)) with
    t = 2x - 1, and phi_n'(x) = -P_n(t).
    """

    degree: int
    coefficients: np.ndarray
    grid: tuple[int, int] = (1, 1)
    subdivision_depth: int = DEFAULT_SUBDIVISION_DEPTH

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_LEGENDRE_DEGREE:
            raise DomainError(f"degree must lie in 1..{MAX_LEGENDRE_DEGREE}, got {self.degree}")
        coeffs = np.asarray(self.coefficients, dtype=np.float64).reshape(self.degree, self.degree)
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("Legendre coefficients must be finite")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        grid = tuple(int(g) for g in self.grid)
        if len(grid) != 2 or min(grid) < 1:
            raise DomainError(f"grid needs two positive counts, got {self.grid}")
        object.__setattr__(self, "grid", grid)
        if self.subdivision_depth < 0:
            raise DomainError("subdivision_depth must be >= 0")

    def value(self, x: float, y: float) -> float:
        """Plain floating-point evaluation (not rigorous)."""
        return float(basis_values(self.degree, x) @ self.coefficients @ basis_values(self.degree, y))


def basis_values(degree: int, x: float) -> np.ndarray:
    """phi_1..phi_degree at a float x, in plain floating point."""
    from numpy.polynomial import legendre

    t = 2.0 * x - 1.0
    p = [legendre.legval(t, [0] * n + [1]) for n in range(degree + 2)]
    return np.array([(p[n - 1] - p[n + 1]) / (2 * (2 * n + 1)) for n in range(1, degree + 1)])


def _legendre_table(t, degree: int):
    """Interval arrays P_0..P_(degree+1) at interval arguments t within [-1, 1]."""
    ones = np.ones_like(t[0])
    table = [(ones, ones), iv.clamp(t, -1.0, 1.0)]
    for n in range(1, degree + 1):
        lead = iv.scale(iv.mul(t, table[n]), float(2 * n + 1))
        prev = iv.scale(table[n - 1], float(n))
        nxt = iv.div_scalar(iv.sub(lead, prev), float(n + 1))
        table.append(iv.clamp(nxt, -1.0, 1.0))
    return table


def _basis(x, degree: int):
    """(phi, phi') as (B, degree) interval arrays for interval x within [0, 1]."""
    t = iv.clamp(iv.sub(iv.scale(x, 2.0), iv.point(1.0)), -1.0, 1.0)
    table = _legendre_table(t, degree)
    phi_lo = np.empty((x[0].shape[0], degree))
    phi_hi = np.empty_like(phi_lo)
    dphi_lo = np.empty_like(phi_lo)
    dphi_hi = np.empty_like(phi_lo)
    for n in range(1, degree + 1):
        lo, hi = iv.div_scalar(iv.sub(table[n - 1], table[n + 1]), float(2 * (2 * n + 1)))
        phi_lo[:, n - 1], phi_hi[:, n - 1] = lo, hi
        dphi_lo[:, n - 1], dphi_hi[:, n - 1] = -table[n][1], -table[n][0]
    return (phi_lo, phi_hi), (dphi_lo, dphi_hi)


def _box_bounds(fld: LegendreField, x, y):
    """Enclosures of u_hat over boxes x * y (interval arrays of shape (B,))."""
    u = fld.coefficients
    m = fld.degree
    cx = iv.point(0.5 * x[0] + 0.5 * x[1])
    cy = iv.point(0.5 * y[0] + 0.5 * y[1])
    phi_x, dphi_x = _basis(x, m)
    phi_y, dphi_y = _basis(y, m)
    phi_cx, _ = _basis(cx, m)
    phi_cy, _ = _basis(cy, m)

    # sharpen each basis enclosure by its own mean-value form
    def sharpen(phi, dphi, box, centre, phi_c):
        offset = iv.sub(box, centre)
        mv = iv.add(phi_c, iv.mul(dphi, (offset[0][:, None], offset[1][:, None])))
        return iv.intersect(phi, mv)

    phi_x = sharpen(phi_x, dphi_x, x, cx, phi_cx)
    phi_y = sharpen(phi_y, dphi_y, y, cy, phi_cy)

    rows_x = iv.matmul_point(phi_x, u)
    naive = iv.rowdot(rows_x, phi_y)
    centre = iv.rowdot(iv.matmul_point(phi_cx, u), phi_cy)
    grad_x = iv.rowdot(iv.matmul_point(dphi_x, u), phi_y)
    grad_y = iv.rowdot(rows_x, dphi_y)
    mv = iv.add(
        centre,
        iv.add(iv.mul(grad_x, iv.sub(x, cx)), iv.mul(grad_y, iv.sub(y, cy))),
    )
    return iv.intersect(naive, mv)


def _axis_cuts(count: int, pieces: int):
    """Outward float enclosures of [k/(count*pieces), (k+1)/(count*pieces)]."""
    total = count * pieces
    lo = np.array([fraction_bounds(Fraction(k, total))[0] for k in range(total)])
    hi = np.array([fraction_bounds(Fraction(k + 1, total))[1] for k in range(total)])
    return lo, hi


def _level_bounds(fld: LegendreField, level: int):
    """Bounds on every sub-box at a dyadic level, shape (nx*2^level, ny*2^level)."""
    nx, ny = fld.grid
    pieces = 2**level
    xs = _axis_cuts(nx, pieces)
    ys = _axis_cuts(ny, pieces)
    gx, gy = np.meshgrid(np.arange(nx * pieces), np.arange(ny * pieces), indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    lo, hi = _box_bounds(fld, iv.take(xs, gx), iv.take(ys, gy))
    return lo.reshape(nx * pieces, ny * pieces), hi.reshape(nx * pieces, ny * pieces)


def legendre_to_mesh(fld: LegendreField) -> CellMesh:
    """Rigorous per-cell bounds of a Legendre field on its rectangular grid.

    Every level of dyadic refinement is intersected with its parent level,
    so deeper refinement never widens a cell's bounds.
    """
    nx, ny = fld.grid
    lo, hi = _level_bounds(fld, 0)
    for level in range(1, fld.subdivision_depth + 1):
        sub_lo, sub_hi = _level_bounds(fld, level)
        parent_lo = np.repeat(np.repeat(lo, 2, axis=0), 2, axis=1)
        parent_hi = np.repeat(np.repeat(hi, 2, axis=0), 2, axis=1)
        lo = np.maximum(sub_lo, parent_lo)
        hi = np.minimum(sub_hi, parent_hi)
    pieces = 2**fld.subdivision_depth
    cell_lo = lo.reshape(nx, pieces, ny, pieces).min(axis=(1, 3))
    cell_hi = hi.reshape(nx, pieces, ny, pieces).max(axis=(1, 3))
    volume = Interval(Fraction(1, nx * ny))
    cells = [
        Cell(volume, float(cell_lo[i, j]), float(cell_hi[i, j]), i * ny + j)
        for i in range(nx)
        for j in range(ny)
    ]
    return CellMesh(tuple(cells), 2, declared_coverage=True, volume_units="1")


def cell_box(fld: LegendreField, cell_id: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Exact corners (x0, x1, y0, y1) of a grid cell."""
    nx, ny = fld.grid
    i, j = divmod(cell_id, ny)
    return Fraction(i, nx), Fraction(i + 1, nx), Fraction(j, ny), Fraction(j + 1, ny)


# ---------------------------------------------------------------------------
# files


def _number(value, where: str, rounding: str | None = None) -> float | Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction, str)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    try:
        exact = parse_exact(value) if isinstance(value, str) else value
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None
    if rounding is None:
        return exact
    lo, hi = fraction_bounds(Fraction(exact)) if not isinstance(exact, float) else (exact, exact)
    return lo if rounding == "down" else hi


def _load_json(source) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def mesh_from_dict(data: dict) -> CellMesh:
    """Parse a cellmesh/1 document.

    Decimal bounds are rounded outward: lower down, upper up, volume_lo down
    and volume_hi up.  Hexadecimal float strings are taken verbatim.
    """
    if data.get("format") != MESH_FORMAT:
        raise InputError(f"format: expected {MESH_FORMAT!r}, got {data.get('format')!r}")
    header = data.get("header")
    if not isinstance(header, dict):
        raise InputError("header: missing object")
    try:
        dimension = int(header["dimension"])
    except (KeyError, TypeError, ValueError):
        raise InputError("header.dimension: missing or not an integer") from None
    coverage = header.get("declared_coverage")
    if coverage is not True:
        raise InputError("header.declared_coverage: must be true (coverage is declared by the producer)")
    cells_raw = data.get("cells")
    if not isinstance(cells_raw, list) or not cells_raw:
        raise InputError("cells: expected a nonempty array")
    cells = []
    for i, raw in enumerate(cells_raw):
        where = f"cells[{i}]"
        if not isinstance(raw, dict):
            raise InputError(f"{where}: expected an object")
        try:
            vol_lo = _number(raw["volume_lo"], f"{where}.volume_lo", "down")
            vol_hi = _number(raw["volume_hi"], f"{where}.volume_hi", "up")
            lower = _number(raw["lower"], f"{where}.lower", "down")
            upper = _number(raw["upper"], f"{where}.upper", "up")
        except KeyError as exc:
            raise InputError(f"{where}: missing field {exc.args[0]}") from None
        try:
            cells.append(Cell(Interval(vol_lo, vol_hi), lower, upper, int(raw.get("id", i))))
        except (ValueError, DomainError) as exc:
            raise InputError(f"{where}: {exc}") from None
    return CellMesh(tuple(cells), dimension, True, str(header.get("volume_units", "1")))


def load_mesh(source) -> CellMesh:
    return mesh_from_dict(_load_json(source))


def mesh_to_dict(mesh: CellMesh) -> dict:
    return {
        "format": MESH_FORMAT,
        "header": {
            "dimension": mesh.dimension,
            "declared_coverage": mesh.declared_coverage,
            "volume_units": mesh.volume_units,
        },
        "cells": [
            {
                "id": c.id,
                "volume_lo": c.volume.lo.hex(),
                "volume_hi": c.volume.hi.hex(),
                "lower": c.lower.hex(),
                "upper": c.upper.hex(),
            }
            for c in mesh.cells
        ],
    }


def dump_mesh(mesh: CellMesh, path) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(mesh), indent=1) + "\n")


def legendre_from_dict(data: dict) -> LegendreField:
    """Parse a legendre/1 document.

    Coefficients are rounded to the nearest binary64 value; the certified
    field is the one with those float coefficients, which is exactly what a
    producer writing shortest round-trip decimals intended.
    """
    if data.get("format") != LEGENDRE_FORMAT:
        raise InputError(f"format: expected {LEGENDRE_FORMAT!r}, got {data.get('format')!r}")
    try:
        degree = int(data["degree"])
    except (KeyError, TypeError, ValueError):
        raise InputError("degree: missing or not an integer") from None
    raw = data.get("coefficients")
    if not isinstance(raw, list):
        raise InputError("coefficients: expected an array")
    flat = list(itertools.chain.from_iterable(raw)) if raw and isinstance(raw[0], list) else raw
    if len(flat) != degree * degree:
        raise InputError(f"coefficients: expected {degree * degree} values, got {len(flat)}")
    coeffs = []
    for k, v in enumerate(flat):
        # the field is defined by the nearest binary64 coefficients
        coeffs.append(float(_number(v, f"coefficients[{k}]")))
    grid = data.get("grid", [1, 1])
    depth = data.get("subdivision_depth", DEFAULT_SUBDIVISION_DEPTH)
    try:
        return LegendreField(degree, np.array(coeffs), tuple(int(g) for g in grid), int(depth))
    except (TypeError, ValueError, DomainError) as exc:
        raise InputError(f"legendre field: {exc}") from None


def load_legendre(source) -> LegendreField:
    return legendre_from_dict(_load_json(source))


def cells_csv(mesh: CellMesh) -> str:
    """Cell bounds as CSV; floats use repr, which round-trips exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "volume_lo", "volume_hi", "lower", "upper"])
    for c in mesh.cells:
        writer.writerow([c.id, repr(c.volume.lo), repr(c.volume.hi), repr(c.lower), repr(c.upper)])
    return out.getvalue()
