"""Vectorised interval arithmetic on numpy arrays.

An interval array is a pair ``(lo, hi)`` of float64 arrays of equal shape.
Each operation is a round-to-nearest numpy operation followed by one
``nextafter`` step outward where the rounded result may be inexact, so
every elementwise result encloses the exact one and exact results such as
sums of zeros stay exact.  Reductions accumulate term by
term, except in ``matmul_point`` which bounds the BLAS rounding
error explicitly.
"""
from __future__ import annotations

import numpy as np

_NEG = -np.inf
_POS = np.inf


def down(x):
    return np.nextafter(x, _NEG)


def up(x):
    return np.nextafter(x, _POS)


def point(x):
    x = np.asarray(x, dtype=np.float64)
    return x, x


def _sum_directed(x, y, upward: bool):
    # TwoSum: err is the exact rounding error of s = x + y
    with np.errstate(invalid="ignore", over="ignore"):
        s = x + y
        yy = s - x
        err = (x - (s - yy)) + (y - yy)
    bad = ~np.isfinite(err)
    if upward:
        return np.where(bad | (err > 0), up(s), s)
    return np.where(bad | (err < 0), down(s), s)


def add(a, b):
    return _sum_directed(a[0], b[0], False), _sum_directed(a[1], b[1], True)


def sub(a, b):
    return _sum_directed(a[0], -b[1], False), _sum_directed(a[1], -b[0], True)


def neg(a):
    return -a[1], -a[0]


def mul(a, b):
    p1 = a[0] * b[0]
    p2 = a[0] * b[1]
    p3 = a[1] * b[0]
    p4 = a[1] * b[1]
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    # a zero factor makes every product exactly zero
    exact = ((a[0] == 0.0) & (a[1] == 0.0)) | ((b[0] == 0.0) & (b[1] == 0.0))
    return np.where(exact, 0.0, down(lo)), np.where(exact, 0.0, up(hi))


def scale(a, s):
    """Interval array times a float array (or scalar) s."""
    p1 = a[0] * s
    p2 = a[1] * s
    return down(np.minimum(p1, p2)), up(np.maximum(p1, p2))


def div_scalar(a, d: float):
    """Division by a positive float d."""
    return down(a[0] / d), up(a[1] / d)


def clamp(a, lo: float, hi: float):
    return np.clip(a[0], lo, hi), np.clip(a[1], lo, hi)


def intersect(a, b):
    return np.maximum(a[0], b[0]), np.minimum(a[1], b[1])


def take(a, index):
    return a[0][index], a[1][index]


_UNIT = 2.0**-53
_ETA = 5e-324


def matmul_point(a, u):
    """(B, M) interval array times an (M, K) float matrix.

    Uses the midpoint-radius form with BLAS products.  Whatever order and
    blocking BLAS uses, a round-to-nearest dot product of length M satisfies
    |fl(x.y) - x.y| <= g_M |x|.|y| + M eta with g_M = M u / (1 - M u), so the
    radius below, evaluated with every step rounded up, covers both the
    input radius and the rounding of the midpoint product.
    """
    lo, hi = a
    inner = u.shape[0]
    centre = 0.5 * lo + 0.5 * hi
    radius = up(np.maximum(up(hi - centre), up(centre - lo)))
    absu = np.abs(u)
    mid = centre @ u
    rad = radius @ absu
    size = np.abs(centre) @ absu
    g = (inner + 2) * _UNIT / (1.0 - (inner + 2) * _UNIT)
    # the products rad and size are themselves rounded; inflate by (1 + g)
    bound = up(up(rad * (1.0 + 2.0 * g)) + up(up(size * (2.0 * g)) + (inner + 1) * _ETA))
    # an all-zero row of a or column of u gives an exact zero
    zero = ~((lo != 0.0) | (hi != 0.0)).any(axis=1)[:, None] | ~(u != 0.0).any(axis=0)[None, :]
    return np.where(zero, 0.0, down(mid - bound)), np.where(zero, 0.0, up(mid + bound))


def rowdot(a, b):
    """Row-wise dot product of two (B, M) interval arrays."""
    rows, inner = a[0].shape
    lo = np.zeros(rows)
    hi = np.zeros(rows)
    for j in range(inner):
        lo, hi = add((lo, hi), mul((a[0][:, j], a[1][:, j]), (b[0][:, j], b[1][:, j])))
    return lo, hi
