"""Equispaced 1D mesh and Galerkin assembly for integral-operator pencils.

The discretisation uses piecewise-constant basis functions (indicator
functions of the cells), so the mass matrix is h times the identity and the
stiffness matrix collects cell-pair double integrals of the kernel.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from .quadrature import cell_pair_integral


@dataclasses.dataclass(frozen=True)
class Grid1D:
    """Equispaced mesh of [a, b] with cell midpoints as nodal points."""

    a: float
    b: float
    n_cells: int
    h: float
    nodal_points: np.ndarray

    @property
    def cell_edges(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n_cells + 1)

    @property
    def cells(self) -> list[tuple[float, float]]:
        e = self.cell_edges
        return list(zip(e[:-1], e[1:]))


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """Symmetric scalar kernel k(x, y) and its singularity strength.

    ``singularity_exponent`` is None for kernels smooth up to the diagonal;
    0.0 marks a logarithmic (sub-algebraic) singularity; a value in (0, 1)
    means |k| <= C |x-y|^-alpha.
    """

    kind: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    singularity_exponent: float | None = None

    @property
    def is_singular(self) -> bool:
        return self.singularity_exponent is not None


@dataclasses.dataclass(frozen=True)
class DiscreteProblem:
    """Dense symmetric stiffness K, diagonal SPD mass M, and their grid."""

    K: np.ndarray
    M: np.ndarray
    grid: Grid1D


def _log_eval(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.asarray(x, dtype=float) - y))


def log_kernel() -> KernelSpec:
    """The weakly singular kernel log|x - y|."""
    return KernelSpec(kind="log", evaluator=_log_eval, singularity_exponent=0.0)


def custom_kernel(evaluator, singularity_exponent: float | None = None,
                  kind: str = "custom") -> KernelSpec:
    """Wrap a vectorised symmetric kernel function for quadrature assembly."""
    return KernelSpec(kind=kind, evaluator=evaluator,
                      singularity_exponent=singularity_exponent)


def build_grid(a: float, b: float, n_cells: int) -> Grid1D:
    """Mesh [a, b] into n_cells equal cells; nodal points are the midpoints."""
    if not a < b:
        raise ValueError(f"invalid range: need a < b, got [{a}, {b}]")
    if n_cells < 1:
        raise ValueError(f"invalid size: need n_cells >= 1, got {n_cells}")
    h = (b - a) / n_cells
    nodal = a + (np.arange(n_cells) + 0.5) * h
    return Grid1D(a=float(a), b=float(b), n_cells=int(n_cells), h=h,
                  nodal_points=nodal)


def assemble_mass(grid: Grid1D) -> np.ndarray:
    """Mass matrix h*Identity (cell indicators have disjoint supports)."""
    return grid.h * np.eye(grid.n_cells)


def _log_primitive(u: np.ndarray) -> np.ndarray:
    """Double primitive of log|s - t|: F(u) = u^2/2 (log|u| - 3/2), F(0) = 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    nz = u != 0.0
    out[nz] = 0.5 * u[nz] ** 2 * (np.log(np.abs(u[nz])) - 1.5)
    return out


def _log_block(xl, xr, yl, yr) -> np.ndarray:
    """Exact log-kernel double integrals for cells [xl,xr] x [yl,yr]."""
    F = _log_primitive
    return (F(xr[:, None] - yl[None, :]) - F(xr[:, None] - yr[None, :])
            - F(xl[:, None] - yl[None, :]) + F(xl[:, None] - yr[None, :]))


def stiffness_entry(grid: Grid1D, kernel: KernelSpec, i: int, j: int,
                    tol: float = 1e-12) -> float:
    """Double integral of the kernel over cell_i x cell_j (0-based indices)."""
    n = grid.n_cells
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"cell index out of range: ({i}, {j}) for N={n}")
    e = grid.cell_edges
    if kernel.kind == "log":
        xl = np.array([e[i]]); xr = np.array([e[i + 1]])
        yl = np.array([e[j]]); yr = np.array([e[j + 1]])
        return float(_log_block(xl, xr, yl, yr)[0, 0])
    return cell_pair_integral(kernel.evaluator, (e[i], e[i + 1]),
                              (e[j], e[j + 1]), kernel.is_singular, tol)


def assemble_stiffness(grid: Grid1D, kernel: KernelSpec,
                       tol: float = 1e-12) -> np.ndarray:
    """Assemble the dense stiffness matrix, exactly symmetrised.

    The log kernel uses its closed-form primitive for every entry; other
    kernels are integrated cell pair by cell pair (lower triangle only,
    mirrored).
    """
    n = grid.n_cells
    if kernel.kind == "log":
        e = grid.cell_edges
        K = _log_block(e[:-1], e[1:], e[:-1], e[1:])
    else:
        K = np.empty((n, n))
        for i in range(n):
            for j in range(i + 1):
                K[i, j] = stiffness_entry(grid, kernel, i, j, tol)
                K[j, i] = K[i, j]
    return 0.5 * (K + K.T)


def build_problem(n_cells: int, kernel: KernelSpec | None = None,
                  a: float = 0.0, b: float = 1.0) -> DiscreteProblem:
    """Assemble the full discrete pencil (K, M) on [a, b]."""
    kernel = kernel if kernel is not None else log_kernel()
    grid = build_grid(a, b, n_cells)
    return DiscreteProblem(K=assemble_stiffness(grid, kernel),
                           M=assemble_mass(grid), grid=grid)


def sample_eigenfunction(grid: Grid1D, coeffs: np.ndarray) -> np.ndarray:
    """(nodal point, value) rows of the piecewise-constant prolongation.

    With indicator basis functions the value at a nodal point is simply the
    coefficient of its cell.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (grid.n_cells,):
        raise ValueError(
            f"coefficient length {coeffs.shape} does not match N={grid.n_cells}")
    return np.column_stack([grid.nodal_points, coeffs])
