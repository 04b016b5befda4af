"""Rank-k factored blocks R = a b^T with adaptive SVD truncation."""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from ..errors import EigenSolveError


@dataclasses.dataclass
class RkMatrix:
    """Low-rank block stored as a @ b.T; rank 0 encodes the zero block."""

    a: np.ndarray  # (n, k)
    b: np.ndarray  # (m, k)

    @property
    def rank(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape[0], self.b.shape[0]

    def to_dense(self) -> np.ndarray:
        return self.a @ self.b.T

    @staticmethod
    def zero(n: int, m: int) -> "RkMatrix":
        return RkMatrix(a=np.zeros((n, 0)), b=np.zeros((m, 0)))


def _svd(block: np.ndarray):
    try:
        return scipy.linalg.svd(block, full_matrices=False)
    except scipy.linalg.LinAlgError:
        # gesdd occasionally fails where gesvd succeeds
        try:
            return scipy.linalg.svd(block, full_matrices=False,
                                    lapack_driver="gesvd")
        except scipy.linalg.LinAlgError as exc:
            raise EigenSolveError(f"SVD failed: {exc}") from exc


def rk_truncate(block: np.ndarray, epsilon: float) -> RkMatrix:
    """Smallest-rank factorisation with sigma_{k+1} <= epsilon * sigma_1."""
    block = np.asarray(block, dtype=float)
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not block.any():
        return RkMatrix.zero(*block.shape)
    u, s, vt = _svd(block)
    k = int(np.count_nonzero(s > epsilon * s[0]))
    return RkMatrix(a=u[:, :k] * s[:k], b=vt[:k].T)


def rk_recompress(a: np.ndarray, b: np.ndarray, epsilon: float) -> RkMatrix:
    """Re-truncate a factored block without forming it densely (QR+SVD)."""
    if a.shape[1] == 0:
        return RkMatrix(a=a.copy(), b=b.copy())
    qa, ra = np.linalg.qr(a)
    qb, rb = np.linalg.qr(b)
    u, s, vt = _svd(ra @ rb.T)
    if s[0] == 0.0:
        return RkMatrix.zero(a.shape[0], b.shape[0])
    k = int(np.count_nonzero(s > epsilon * s[0]))
    return RkMatrix(a=qa @ (u[:, :k] * s[:k]), b=qb @ vt[:k].T)


def rk_join(x: RkMatrix, y: RkMatrix, epsilon: float) -> RkMatrix:
    """Truncated sum of two factored blocks of the same shape."""
    if x.rank == 0:
        return y
    if y.rank == 0:
        return x
    return rk_recompress(np.hstack([x.a, y.a]), np.hstack([x.b, y.b]), epsilon)
