"""Dense symmetric linear-algebra primitives.

Everything here works on plain ndarrays: the generalized symmetric
eigensolver (Cholesky reduction to a standard problem, full solve, then
selection), the single-split block LDL^T with explicit coupling and Schur
complement, the matching congruence transform of the mass matrix, block
back-substitution, column orthonormalisation with a drop tolerance, and
Rayleigh-Ritz projection.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
import scipy.linalg

from .errors import (EigenSolveError, EmptySubspaceError, NotSPDError,
                     SingularBlockError)

LARGEST = "largest_magnitude"
SMALLEST = "smallest_magnitude"
ALL = "all"


@dataclasses.dataclass(frozen=True)
class PartialEigensolution:
    """Selected eigenvalues and B-orthonormal eigenvectors of a pencil."""

    values: np.ndarray   # (k,), magnitude-sorted
    vectors: np.ndarray  # (n, k)
    gram: str            # label of the inner-product matrix used to normalise


@dataclasses.dataclass(frozen=True)
class RitzPairs:
    """Ritz values (magnitude-descending) and M-orthonormal Ritz vectors."""

    values: np.ndarray    # (n_es,)
    vectors: np.ndarray   # (N, n_es)
    subspace_dim: int     # number of basis columns the projection used


@dataclasses.dataclass(frozen=True)
class BlockLDLT:
    """K = L diag[K11, schur] L^T with L unit lower block-triangular.

    ``coupling`` stores K21 K11^{-1}; K11 itself is kept only as an LU
    factorisation handle, its inverse is never formed.
    """

    n1: int
    n2: int
    coupling: np.ndarray                     # (n2, n1)
    k11_factor: tuple[np.ndarray, np.ndarray]  # scipy lu_factor output
    schur: np.ndarray                        # (n2, n2), symmetric

    def expand_l(self) -> np.ndarray:
        n = self.n1 + self.n2
        L = np.eye(n)
        L[self.n1:, :self.n1] = self.coupling
        return L


def _check_symmetric(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    scale = np.abs(A).max() or 1.0
    if np.abs(A - A.T).max() > 1e-8 * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude component is positive."""
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def select_by_magnitude(values: np.ndarray, count: int | None = None,
                        which: str = LARGEST) -> np.ndarray:
    """Indices of the selected eigenvalues, output magnitude-descending.

    Ties in magnitude keep ascending input order (stable sort).
    """
    order = np.argsort(-np.abs(values), kind="stable")
    if which == LARGEST or which == ALL:
        picked = order if which == ALL or count is None else order[:count]
    elif which == SMALLEST:
        picked = order if count is None else order[len(order) - count:]
    else:
        raise ValueError(f"unknown selection rule {which!r}")
    return picked


def sym_eig_generalized(A: np.ndarray, B: np.ndarray, count: int | None = None,
                        which: str = LARGEST,
                        gram: str = "B") -> PartialEigensolution:
    """Solve A x = lambda B x for symmetric A and SPD B.

    B is Cholesky-factored (B = C C^T), the problem is reduced to a standard
    symmetric one for C^{-1} A C^{-T}, solved completely, and the requested
    eigenpairs are selected.  Returned vectors are B-orthonormal.
    """
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    n = A.shape[0]
    if A.shape != B.shape:
        raise ValueError(f"pencil shape mismatch: {A.shape} vs {B.shape}")
    if count is not None and not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    try:
        C = scipy.linalg.cholesky(B, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotSPDError(f"B is not positive definite: {exc}") from exc
    X = scipy.linalg.solve_triangular(C, A, lower=True)
    Ared = scipy.linalg.solve_triangular(C, X.T, lower=True).T
    Ared = 0.5 * (Ared + Ared.T)
    try:
        w, V = scipy.linalg.eigh(Ared)
    except scipy.linalg.LinAlgError as exc:
        raise EigenSolveError(str(exc)) from exc
    V = scipy.linalg.solve_triangular(C, V, trans="T", lower=True)
    picked = select_by_magnitude(w, count, which)
    return PartialEigensolution(values=w[picked], vectors=V[:, picked],
                                gram=gram)


def block_ldlt(K: np.ndarray, n1: int) -> BlockLDLT:
    """Single-split block LDL^T of a symmetric matrix.

    The coupling block is obtained by solving with the pivoted LU of K11
    (K11 symmetric, so K21 K11^{-1} = (K11^{-1} K12)^T).
    """
    K = _check_symmetric(K, "K")
    n = K.shape[0]
    if not 1 <= n1 < n:
        raise ValueError(f"n1 must be in [1, {n - 1}], got {n1}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(K[:n1, :n1])
    if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        raise SingularBlockError("leading block K11 is singular")
    coupling = scipy.linalg.lu_solve((lu, piv), K[:n1, n1:]).T
    schur = K[n1:, n1:] - coupling @ K[:n1, n1:]
    schur = 0.5 * (schur + schur.T)
    return BlockLDLT(n1=n1, n2=n - n1, coupling=coupling,
                     k11_factor=(lu, piv), schur=schur)


def transform_mass(M: np.ndarray, f: BlockLDLT) -> np.ndarray:
    """Congruence transform L^{-1} M L^{-T} expressed through the coupling."""
    M = _check_symmetric(M, "M")
    n1, n2 = f.n1, f.n2
    if M.shape[0] != n1 + n2:
        raise ValueError(f"size mismatch: M is {M.shape}, factor is {n1 + n2}")
    G = f.coupling
    M11, M12 = M[:n1, :n1], M[:n1, n1:]
    M21, M22 = M[n1:, :n1], M[n1:, n1:]
    Mt21 = M21 - G @ M11
    GM12 = G @ M12
    Mt22 = M22 - GM12 - GM12.T + G @ M11 @ G.T
    out = np.empty_like(M)
    out[:n1, :n1] = M11
    out[n1:, :n1] = Mt21
    out[:n1, n1:] = Mt21.T
    out[n1:, n1:] = 0.5 * (Mt22 + Mt22.T)
    return out


def back_transform(f: BlockLDLT, Z: np.ndarray) -> np.ndarray:
    """Apply L^{-T} to column vectors by block back-substitution."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[0] != f.n1 + f.n2:
        raise ValueError(f"row count {Z.shape[0]} != {f.n1 + f.n2}")
    out = Z.copy()
    out[:f.n1] -= f.coupling.T @ Z[f.n1:]
    return out


def orthonormalize_columns(Q: np.ndarray, drop_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the numerical column space of Q.

    Two-pass modified Gram-Schmidt in original column order; a column is
    dropped when its residual after projection is <= drop_tol times the
    largest input column norm.  Column order of the survivors is preserved.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2:
        raise ValueError("Q must be a 2d array")
    n, k = Q.shape
    scale = np.sqrt((Q * Q).sum(axis=0)).max() if Q.size else 0.0
    basis = np.empty((n, min(n, k)))
    m = 0
    for j in range(k):
        v = Q[:, j].copy()
        for _ in range(2):
            if m:
                v -= basis[:, :m] @ (basis[:, :m].T @ v)
        norm = np.linalg.norm(v)
        if norm > drop_tol * scale and m < basis.shape[1]:
            basis[:, m] = v / norm
            m += 1
    if m == 0:
        raise EmptySubspaceError("all columns were dropped")
    return basis[:, :m].copy()


def direct_solve(K: np.ndarray, M: np.ndarray, n_es: int) -> RitzPairs:
    """Reference dense path: full solve, largest-magnitude pairs, sign-fixed."""
    es = sym_eig_generalized(K, M, count=min(n_es, K.shape[0]), which=LARGEST,
                             gram="M")
    return RitzPairs(values=es.values, vectors=_fix_signs(es.vectors),
                     subspace_dim=K.shape[0])


def rayleigh_ritz(K: np.ndarray, M: np.ndarray, Q: np.ndarray,
                  count: int) -> RitzPairs:
    """Project (K, M) onto range(Q) and return the leading Ritz pairs.

    Reduced matrices are Q^T K Q and Q^T M Q; Ritz vectors Q x̂ inherit
    M-orthonormality from the reduced solve.
    """
    Q = np.asarray(Q, dtype=float)
    if count > Q.shape[1]:
        raise ValueError(f"count {count} exceeds basis size {Q.shape[1]}")
    Khat = Q.T @ (K @ Q)
    Mhat = Q.T @ (M @ Q)
    es = sym_eig_generalized(0.5 * (Khat + Khat.T), 0.5 * (Mhat + Mhat.T),
                             count=count, which=LARGEST, gram="Q^T M Q")
    return RitzPairs(values=es.values, vectors=_fix_signs(Q @ es.vectors),
                     subspace_dim=Q.shape[1])
