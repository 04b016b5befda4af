"""File export: Matrix Market matrices and eigenfunction CSV series."""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse

from .grid import Grid1D, sample_eigenfunction


def write_stiffness_matrix_market(path, K: np.ndarray) -> None:
    """Dense real general array-format export."""
    scipy.io.mmwrite(path, np.asarray(K), symmetry="general")


def write_mass_matrix_market(path, M: np.ndarray) -> None:
    """Coordinate-format export of the diagonal mass matrix."""
    M = np.asarray(M)
    diag = np.diag(M) if M.ndim == 2 else M
    scipy.io.mmwrite(path, scipy.sparse.diags(diag).tocoo(), symmetry="general")


def write_eigenfunction_csv(path, grid: Grid1D, coeffs: np.ndarray) -> None:
    """CSV with header x,value; 16 significant digits."""
    rows = sample_eigenfunction(grid, coeffs)
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for x, v in rows:
            fh.write(f"{x:.15e},{v:.15e}\n")


def read_eigenfunction_csv(path) -> np.ndarray:
    """Read back an (x, value) series written by write_eigenfunction_csv."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
