"""Single-split substructuring eigensolver for dense symmetric pencils.

The pipeline: reorder indices by subdomain, block-diagonalise K, transform M
by the same congruence, solve the two subproblems partially (largest
eigenvalues by magnitude), project onto the block-diagonal eigenvector
subspace, solve the reduced pencil and transform the Ritz vectors back.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .dense_core import (LARGEST, RitzPairs, _fix_signs, back_transform,
                         block_ldlt, sym_eig_generalized, transform_mass)
from .grid import DiscreteProblem, Grid1D

OMEGA1_FIRST = "omega1_first"
OMEGA2_FIRST = "omega2_first"


@dataclasses.dataclass(frozen=True)
class Partition:
    """Index split of a grid at a geometric point.

    ``perm`` maps permuted slot -> original index, with one subdomain's
    indices (ascending) before the other's; which one leads is set by
    ``orientation``.  n1/n2 count the indices left/right of the split
    regardless of orientation.
    """

    split_point: float
    perm: np.ndarray
    n1: int
    n2: int
    orientation: str

    @property
    def leading_size(self) -> int:
        return self.n1 if self.orientation == OMEGA1_FIRST else self.n2

    def unpermute_rows(self, X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        out[self.perm] = X
        return out


@dataclasses.dataclass(frozen=True)
class FixedRank:
    """Keep exactly k1 / k2 eigenpairs from the two subproblems."""

    k1: int
    k2: int

    def counts(self, n_first: int, n_second: int) -> tuple[int, int]:
        return min(self.k1, n_first), min(self.k2, n_second)


@dataclasses.dataclass(frozen=True)
class PowerRank:
    """Keep ceil(c * N_i^beta) eigenpairs per subproblem."""

    c: float = 2.0
    beta: float = 1.0 / 3.0

    def counts(self, n_first: int, n_second: int) -> tuple[int, int]:
        k = lambda n: max(1, min(n, math.ceil(self.c * n ** self.beta)))
        return k(n_first), k(n_second)


@dataclasses.dataclass(frozen=True)
class FullRank:
    """Keep every eigenpair (turns the method into an exact solve)."""

    def counts(self, n_first: int, n_second: int) -> tuple[int, int]:
        return n_first, n_second


@dataclasses.dataclass(frozen=True)
class AmlsConfig:
    """Knobs shared by the dense, combined and recursive solvers."""

    k_rule: FixedRank | PowerRank | FullRank
    n_es: int
    drop_tol: float = 1e-8
    recursion_threshold: int = 64
    h_accuracy: float = 1e-8
    eta: float = 1.0
    n_min: int = 32

    def __post_init__(self):
        if self.n_es < 1:
            raise ValueError(f"n_es must be >= 1, got {self.n_es}")
        if isinstance(self.k_rule, FixedRank):
            if self.k_rule.k1 < 1 or self.k_rule.k2 < 1:
                raise ValueError("fixed rank counts must be >= 1")
        if isinstance(self.k_rule, PowerRank):
            if self.k_rule.c <= 0 or not 0 < self.k_rule.beta < 1:
                raise ValueError("power rule needs c > 0 and beta in (0, 1)")


def partition_indices(grid: Grid1D, split_point: float,
                      orientation: str = OMEGA1_FIRST) -> Partition:
    """Assign indices by nodal point: strictly left of the split vs rest."""
    if not grid.a < split_point < grid.b:
        raise ValueError(
            f"split point {split_point} not inside ({grid.a}, {grid.b})")
    if orientation not in (OMEGA1_FIRST, OMEGA2_FIRST):
        raise ValueError(f"unknown orientation {orientation!r}")
    in_first = grid.nodal_points < split_point
    idx1 = np.flatnonzero(in_first)
    idx2 = np.flatnonzero(~in_first)
    if len(idx1) == 0 or len(idx2) == 0:
        raise ValueError(f"degenerate partition at split {split_point}")
    perm = (np.concatenate([idx1, idx2]) if orientation == OMEGA1_FIRST
            else np.concatenate([idx2, idx1]))
    return Partition(split_point=float(split_point), perm=perm,
                     n1=len(idx1), n2=len(idx2), orientation=orientation)


def _clamp_n_es(n_es: int, k_bar: int) -> int:
    if n_es > k_bar:
        warnings.warn(f"requested {n_es} pairs but the reduced problem has "
                      f"only {k_bar}; clamping", stacklevel=3)
        return k_bar
    return n_es


def _partial_eigensolutions(Kp, Mp, f, config, n_first):
    """Subproblem solves on the leading block and the Schur complement."""
    Mt = transform_mass(Mp, f)
    k1, k2 = config.k_rule.counts(n_first, Kp.shape[0] - n_first)
    if isinstance(config.k_rule, FixedRank):
        if config.k_rule.k1 > n_first or config.k_rule.k2 > Kp.shape[0] - n_first:
            raise ValueError(
                f"fixed rank ({config.k_rule.k1}, {config.k_rule.k2}) exceeds "
                f"block sizes ({n_first}, {Kp.shape[0] - n_first})")
    es1 = sym_eig_generalized(Kp[:n_first, :n_first], Mp[:n_first, :n_first],
                              count=k1, which=LARGEST, gram="M11")
    es2 = sym_eig_generalized(f.schur, Mt[n_first:, n_first:],
                              count=k2, which=LARGEST, gram="Mt22")
    return Mt, es1, es2


def _subspace_matrix(f, es1, es2) -> np.ndarray:
    """Z = diag[S1, S2] back-substituted through L^{-T} (permuted order)."""
    n, k1, k2 = f.n1 + f.n2, es1.values.size, es2.values.size
    Z = np.zeros((n, k1 + k2))
    Z[:f.n1, :k1] = es1.vectors
    Z[f.n1:, k1:] = es2.vectors
    return back_transform(f, Z)


def dense_amls_solve(problem: DiscreteProblem, partition: Partition,
                     config: AmlsConfig) -> RitzPairs:
    """Single-orientation substructuring solve of (K, M).

    Returns the n_es largest-magnitude Ritz pairs in the original index
    ordering, with M-orthonormal sign-fixed vectors.
    """
    p = partition.perm
    Kp = problem.K[np.ix_(p, p)]
    Mp = problem.M[np.ix_(p, p)]
    n1 = partition.leading_size
    f = block_ldlt(Kp, n1)
    Mt, es1, es2 = _partial_eigensolutions(Kp, Mp, f, config, n1)
    k1, k2 = es1.values.size, es2.values.size
    k_bar = k1 + k2

    # reduced pencil: diag of the kept eigenvalues vs the projected mass
    Khat = np.diag(np.concatenate([es1.values, es2.values]))
    Z = np.zeros((Kp.shape[0], k_bar))
    Z[:n1, :k1] = es1.vectors
    Z[n1:, k1:] = es2.vectors
    Mhat = Z.T @ (Mt @ Z)
    Mhat = 0.5 * (Mhat + Mhat.T)

    n_es = _clamp_n_es(config.n_es, k_bar)
    red = sym_eig_generalized(Khat, Mhat, count=n_es, which=LARGEST,
                              gram="Mhat")
    Y = back_transform(f, Z @ red.vectors)
    return RitzPairs(values=red.values,
                     vectors=_fix_signs(partition.unpermute_rows(Y)),
                     subspace_dim=k_bar)
