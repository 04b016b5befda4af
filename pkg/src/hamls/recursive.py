"""Recursive two-orientation substructuring in H-arithmetic.

Each level eliminates one diagonal block per orientation (both orders),
recurses into the four resulting subproblems, assembles the union of the
back-substituted eigenvector subspaces and projects the level's own pencil
onto it.  Subproblems below the size threshold are densified and solved
directly.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .amls import AmlsConfig, _clamp_n_es
from .dense_core import (RitzPairs, _fix_signs, direct_solve,
                         orthonormalize_columns, sym_eig_generalized)
from .errors import RecursionLimitError
from .hmatrix import HMatrix, h_block_ldlt, h_transform_mass
from .hmatrix.core import _check_conforming

MAX_DEPTH = 64


def _orientation_subspace(K_h: HMatrix, M_h: HMatrix, config: AmlsConfig,
                          pivot: int, depth: int,
                          trace) -> tuple[np.ndarray, int, int]:
    """One orientation: eliminate, recurse into both subproblems, couple."""
    n = K_h.shape[0]
    n1 = K_h.tree.root.sons[0][0].row.size
    fac = h_block_ldlt(K_h, config.h_accuracy, pivot_block=pivot)
    Mt = h_transform_mass(M_h, fac, config.h_accuracy)
    p, q = (0, 1) if pivot == 0 else (1, 0)
    K_first, M_first = K_h.sub_block(p, p), M_h.sub_block(p, p)
    K_second, M_second = fac.schur, Mt.sub_block(q, q)
    k1, k2 = config.k_rule.counts(K_first.shape[0], K_second.shape[0])
    es1 = hamls_solve(K_first, M_first,
                      dataclasses.replace(config, n_es=k1), depth + 1, trace)
    es2 = hamls_solve(K_second, M_second,
                      dataclasses.replace(config, n_es=k2), depth + 1, trace)
    k1, k2 = es1.values.size, es2.values.size
    pivot_rows = slice(0, n1) if pivot == 0 else slice(n1, n)
    other_rows = slice(n1, n) if pivot == 0 else slice(0, n1)
    Q = np.zeros((n, k1 + k2))
    Q[pivot_rows, :k1] = es1.vectors
    Q[other_rows, k1:] = es2.vectors
    # L^{-T} couples the Schur-block modes back into the pivot rows
    Q[pivot_rows, k1:] -= fac.coupling_transpose_apply(es2.vectors)
    return Q, k1, k2


def hamls_solve(K_h: HMatrix, M_h: HMatrix, config: AmlsConfig,
                depth: int = 0, trace: list | None = None) -> RitzPairs:
    """Solve the H-form pencil for its largest-magnitude eigenpairs.

    Vectors are returned in the caller's index order (the H-matrix
    permutation is applied at each level; sub-block views are local).
    ``trace``, when given, collects per-level dicts.
    """
    if depth > MAX_DEPTH:
        raise RecursionLimitError(f"recursion deeper than {MAX_DEPTH}")
    _check_conforming(K_h, M_h)
    n = K_h.shape[0]
    t0 = time.perf_counter()
    if n <= config.recursion_threshold or K_h.tree.root.is_leaf:
        # formatted arithmetic leaves O(eps) asymmetric noise on transformed
        # subproblems; project back onto the symmetric part before solving
        K = K_h.to_dense(order="tree")
        M = M_h.to_dense(order="tree")
        pairs = direct_solve(0.5 * (K + K.T), 0.5 * (M + M.T), config.n_es)
    else:
        Qa, k1, k2 = _orientation_subspace(K_h, M_h, config, 0, depth, trace)
        Qb, _, _ = _orientation_subspace(K_h, M_h, config, 1, depth, trace)
        Q = orthonormalize_columns(np.hstack([Qa, Qb]), config.drop_tol)
        n_es = _clamp_n_es(config.n_es, Q.shape[1])
        KQ = K_h.matvec(Q, order="tree")
        MQ = M_h.matvec(Q, order="tree")
        Khat = Q.T @ KQ
        Mhat = Q.T @ MQ
        red = sym_eig_generalized(0.5 * (Khat + Khat.T),
                                  0.5 * (Mhat + Mhat.T), count=n_es,
                                  gram="Mhat")
        pairs = RitzPairs(values=red.values,
                          vectors=_fix_signs(Q @ red.vectors),
                          subspace_dim=Q.shape[1])
        if trace is not None:
            trace.append({
                "depth": depth, "n": n, "k1": k1, "k2": k2,
                "k_bar": pairs.subspace_dim,
                "dropped_columns": Qa.shape[1] + Qb.shape[1] - Q.shape[1],
                "wall_time": time.perf_counter() - t0,
            })
    perm = K_h.row_perm
    vectors = np.empty_like(pairs.vectors)
    vectors[perm] = pairs.vectors
    return dataclasses.replace(pairs, vectors=vectors)
