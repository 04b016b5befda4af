"""Two-orientation substructuring: Rayleigh-Ritz on the union subspace.

A single-orientation run transfers spectral information in one direction
only; combining the subspaces obtained with both index orderings, removing
dependent columns, and projecting the original pencil restores the missing
information near the subdomain interface.
"""

from __future__ import annotations

from .amls import (OMEGA1_FIRST, OMEGA2_FIRST, AmlsConfig, Partition,
                   _clamp_n_es, _partial_eigensolutions, _subspace_matrix,
                   partition_indices)
from .dense_core import RitzPairs, block_ldlt, orthonormalize_columns, rayleigh_ritz
from .grid import DiscreteProblem

import numpy as np


def half_subspace(problem: DiscreteProblem, partition: Partition,
                  config: AmlsConfig) -> np.ndarray:
    """Approximation subspace of one orientation, in original index order.

    Columns are L^{-T} diag[S1, S2]: the k1 leading-block eigenvectors
    followed by the k2 Schur-complement eigenvectors, each group ordered by
    eigenvalue magnitude.
    """
    p = partition.perm
    Kp = problem.K[np.ix_(p, p)]
    Mp = problem.M[np.ix_(p, p)]
    n1 = partition.leading_size
    f = block_ldlt(Kp, n1)
    _, es1, es2 = _partial_eigensolutions(Kp, Mp, f, config, n1)
    return partition.unpermute_rows(_subspace_matrix(f, es1, es2))


def combined_dense_amls_solve(problem: DiscreteProblem, split_point: float,
                              config: AmlsConfig) -> RitzPairs:
    """Rayleigh-Ritz on the union of both orientation subspaces.

    Dependent columns of [Q_A, Q_B] are removed by orthonormalisation with
    ``config.drop_tol``; the reduced matrices are built from the original
    (unpermuted) K and M.
    """
    part_a = partition_indices(problem.grid, split_point, OMEGA1_FIRST)
    part_b = partition_indices(problem.grid, split_point, OMEGA2_FIRST)
    Qa = half_subspace(problem, part_a, config)
    Qb = half_subspace(problem, part_b, config)
    Q = orthonormalize_columns(np.hstack([Qa, Qb]), config.drop_tol)
    n_es = _clamp_n_es(config.n_es, Q.shape[1])
    return rayleigh_ritz(problem.K, problem.M, Q, n_es)
