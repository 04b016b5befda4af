"""Panel Gauss-Legendre quadrature for cell-pair double integrals.

Used for custom kernels only; the built-in logarithmic kernel has a closed
form (see grid.assemble_stiffness).  Singular kernels are handled by grading
the panels geometrically into the singular set: Duffy triangles when the two
cells coincide, corner grading when they touch, plain adaptive bisection when
they are separated.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureError

# Geometric grading: ratio 1/2, 40 levels resolves endpoint log/power
# singularities to ~1e-14.
_GRADE_LEVELS = 40
_GRADE_RATIO = 0.5
_BASE_ORDER = 12
_CHECK_ORDER = 18
_MAX_DEPTH = 24


@lru_cache(maxsize=None)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _graded_breakpoints(a: float, b: float, toward_b: bool,
                        min_frac: float = 0.0) -> np.ndarray:
    """Breakpoints of [a,b] accumulating geometrically toward one endpoint.

    ``min_frac`` is the smallest relative panel scale kept; the remaining
    sliver down to the endpoint becomes the closing panel.
    """
    t = _GRADE_RATIO ** np.arange(_GRADE_LEVELS, -1, -1.0)
    t = t[t >= min(min_frac, 0.25)]
    t = np.concatenate([[0.0], t])
    pts = b - (b - a) * t[::-1] if toward_b else a + (b - a) * t
    # fp collapse near the accumulation point produces zero-width panels
    keep = np.concatenate([[True], np.diff(pts) > 0])
    return pts[keep]


def _composite_nodes(pts: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl(order)
    half = 0.5 * np.diff(pts)
    mid = pts[:-1] + half
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tensor(f, xn, xw, yn, yw) -> float:
    vals = f(xn[:, None], yn[None, :])
    return float(np.einsum("i,j,ij->", xw, yw, vals))


def _masked_eval(f, X, Y) -> np.ndarray:
    """Evaluate the kernel, zeroing non-finite values.

    Non-finite values can only occur where |x - y| underflows the fp
    resolution of the coordinates; there the quadrature weight times any
    weakly singular kernel bound is below machine precision, so dropping
    the node is exact to working accuracy.  (Divergent kernels are caught
    separately by the grading-depth check.)
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        V = np.asarray(f(X, Y), dtype=float)
    return np.where(np.isfinite(V), V, 0.0)


def _duffy_identical(f, a: float, b: float, order: int,
                     min_frac: float = 0.0) -> float:
    """Integral of f over [a,b]^2 with a singularity along the diagonal.

    Each triangle is mapped to the unit square (x = a+su, y = a+suv with
    Jacobian s^2 u), which leaves only edge singularities at u=0 and v=1;
    those are resolved by the geometric grading.
    """
    s = b - a
    un, uw = _composite_nodes(
        _graded_breakpoints(0.0, 1.0, False, min_frac), order)
    vn, vw = _composite_nodes(
        _graded_breakpoints(0.0, 1.0, True, min_frac), order)
    U = un[:, None]
    X = a + s * U + 0.0 * vn[None, :]
    Y = a + s * U * vn[None, :]
    W = (uw[:, None] * vw[None, :]) * (s * s * U)
    return float(np.sum(W * _masked_eval(f, X, Y))
                 + np.sum(W * _masked_eval(f, Y, X)))


def _corner_graded(f, cx, cy, corner: float, order: int,
                   min_frac: float = 0.0) -> float:
    """Integral over cx x cy with the singularity at (corner, corner)."""
    xn, xw = _composite_nodes(
        _graded_breakpoints(cx[0], cx[1], corner == cx[1], min_frac),
        order)
    yn, yw = _composite_nodes(
        _graded_breakpoints(cy[0], cy[1], corner == cy[1], min_frac),
        order)
    vals = _masked_eval(f, xn[:, None], yn[None, :])
    return float(np.einsum("i,j,ij->", xw, yw, vals))


def _adaptive_rect(f, cx, cy, tol: float, depth: int) -> float:
    x, w = _gl(_BASE_ORDER)
    def one(ax, bx, ay, by):
        hx, hy = 0.5 * (bx - ax), 0.5 * (by - ay)
        xn = ax + hx * (x + 1.0)
        yn = ay + hy * (x + 1.0)
        return _tensor(f, xn, hx * w, yn, hy * w)

    coarse = one(cx[0], cx[1], cy[0], cy[1])
    mx, my = 0.5 * (cx[0] + cx[1]), 0.5 * (cy[0] + cy[1])
    quads = [((cx[0], mx), (cy[0], my)), ((cx[0], mx), (my, cy[1])),
             ((mx, cx[1]), (cy[0], my)), ((mx, cx[1]), (my, cy[1]))]
    fine = sum(one(a[0], a[1], b[0], b[1]) for a, b in quads)
    if abs(fine - coarse) <= max(tol, 1e-15 * abs(fine)):
        return fine
    if depth >= _MAX_DEPTH:
        raise QuadratureError(
            f"cell-pair quadrature stalled at depth {depth}: "
            f"residual {abs(fine - coarse):.3e} > tol {tol:.3e}")
    return sum(_adaptive_rect(f, a, b, tol / 4.0, depth + 1) for a, b in quads)


def cell_pair_integral(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    cell_x: tuple[float, float],
    cell_y: tuple[float, float],
    singular: bool,
    tol: float = 1e-12,
) -> float:
    """Compute the double integral of f(x, y) over cell_x x cell_y.

    ``singular`` marks kernels that blow up on the diagonal x = y; for those
    the cells must be identical, share exactly one endpoint, or be disjoint
    (which is always the case for cells of one grid).

    Raises QuadratureError when the two quadrature orders disagree by more
    than ``tol``.
    """
    cx = (float(cell_x[0]), float(cell_x[1]))
    cy = (float(cell_y[0]), float(cell_y[1]))
    separated = cx[1] < cy[0] or cy[1] < cx[0]
    if not singular or separated:
        return _adaptive_rect(f, cx, cy, tol, 0)

    if cx == cy:
        rule = lambda order, mf=0.0: _duffy_identical(f, cx[0], cx[1], order,
                                                      mf)
    elif cx[1] == cy[0] or cy[1] == cx[0]:
        corner = cx[1] if cx[1] == cy[0] else cy[1]
        rule = lambda order, mf=0.0: _corner_graded(f, cx, cy, corner, order,
                                                    mf)
    else:
        raise ValueError(
            f"singular kernel over partially overlapping cells {cx} / {cy}")

    base = rule(_BASE_ORDER)
    check = rule(_CHECK_ORDER)
    # a much shallower grading must already agree: catches divergent kernels
    shallow = rule(_BASE_ORDER, _GRADE_RATIO ** (_GRADE_LEVELS - 8))
    order_err = abs(base - check)
    depth_err = abs(base - shallow)
    if (not np.isfinite(base)
            or order_err > max(tol, 1e-14 * abs(base))
            or depth_err > max(100.0 * tol, 1e-12 * abs(base))):
        raise QuadratureError(
            f"singular cell-pair quadrature did not converge: order residual "
            f"{order_err:.3e}, depth residual {depth_err:.3e}, tol {tol:.3e}")
    return check
