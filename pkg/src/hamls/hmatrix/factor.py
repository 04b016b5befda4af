"""Block elimination in H-arithmetic.

The single-split transformation needs the coupling block K21 K11^{-1} and
the Schur complement K22 - K21 K11^{-1} K12 (or the mirror image when the
trailing block is eliminated).  The coupling is obtained from an H-LU of
the pivot diagonal block followed by triangular solves inside its
structure; no global factorisation is ever formed.  LU pivots are not
permuted (standard H-matrix practice).
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from ..errors import SingularBlockError, StructureMismatchError
from .cluster import BlockNode
from .core import (Full, HMatrix, Inner, Node, RkMatrix, node_add,
                   node_matvec, node_multiply, node_rmatvec, node_transpose)


def _lu_dense(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unpivoted LU of a small dense block (L unit lower, U upper)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    for k in range(n):
        p = A[k, k]
        if p == 0.0 or not np.isfinite(p):
            raise SingularBlockError(f"zero pivot at position {k}")
        if k + 1 < n:
            A[k + 1:, k] /= p
            A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return np.tril(A, -1) + np.eye(n), np.triu(A)


def h_lu(b: BlockNode, v: Node, eps: float) -> tuple[Node, Node]:
    """H-LU of a square diagonal block: v = L U with truncation eps."""
    if isinstance(v, Full):
        L, U = _lu_dense(v.matrix)
        return Full(L), Full(U)
    if not isinstance(v, Inner):
        raise SingularBlockError("diagonal block is zero or low-rank")
    b00, b01 = b.sons[0][0], b.sons[0][1]
    b10, b11 = b.sons[1][0], b.sons[1][1]
    L11, U11 = h_lu(b00, v.sons[0][0], eps)
    U12 = solve_lower_left(b00, L11, b01, v.sons[0][1], eps)
    L21 = solve_upper_right(b00, U11, b10, v.sons[1][0], eps)
    update = node_multiply(b10, L21, b01, U12, b11, eps)
    S = node_add(b11, v.sons[1][1], update, eps, beta=-1.0)
    L22, U22 = h_lu(b11, S, eps)
    return (Inner(sons=[[L11, None], [L21, L22]]),
            Inner(sons=[[U11, U12], [None, U22]]))


# --- dense companions (thin right-hand sides) ------------------------------


def solve_lower_dense(b: BlockNode, L: Node, X: np.ndarray) -> np.ndarray:
    """L^{-1} X for unit-lower H-form L and dense X."""
    if isinstance(L, Full):
        return scipy.linalg.solve_triangular(L.matrix, X, lower=True,
                                             unit_diagonal=True)
    r = b.sons[0][0].row.size
    top = solve_lower_dense(b.sons[0][0], L.sons[0][0], X[:r])
    rhs = X[r:] - node_matvec(b.sons[1][0], L.sons[1][0], top)
    bot = solve_lower_dense(b.sons[1][1], L.sons[1][1], rhs)
    return np.vstack([top, bot])


def solve_upper_dense(b: BlockNode, U: Node, X: np.ndarray) -> np.ndarray:
    """U^{-1} X for upper H-form U and dense X."""
    if isinstance(U, Full):
        return scipy.linalg.solve_triangular(U.matrix, X, lower=False)
    r = b.sons[0][0].row.size
    bot = solve_upper_dense(b.sons[1][1], U.sons[1][1], X[r:])
    rhs = X[:r] - node_matvec(b.sons[0][1], U.sons[0][1], bot)
    top = solve_upper_dense(b.sons[0][0], U.sons[0][0], rhs)
    return np.vstack([top, bot])


def solve_upper_transpose_dense(b: BlockNode, U: Node,
                                X: np.ndarray) -> np.ndarray:
    """U^{-T} X for upper H-form U and dense X."""
    if isinstance(U, Full):
        return scipy.linalg.solve_triangular(U.matrix, X, lower=False,
                                             trans="T")
    r = b.sons[0][0].row.size
    top = solve_upper_transpose_dense(b.sons[0][0], U.sons[0][0], X[:r])
    rhs = X[r:] - node_rmatvec(b.sons[0][1], U.sons[0][1], top)
    bot = solve_upper_transpose_dense(b.sons[1][1], U.sons[1][1], rhs)
    return np.vstack([top, bot])


# --- H-form solves ----------------------------------------------------------


def solve_lower_left(bl: BlockNode, L: Node, bb: BlockNode, B: Node,
                     eps: float) -> Node:
    """X = L^{-1} B with L unit-lower on a diagonal block."""
    if B is None:
        return None
    if isinstance(B, RkMatrix):
        return RkMatrix(a=solve_lower_dense(bl, L, B.a), b=B.b.copy())
    if isinstance(B, Full):
        return Full(solve_lower_dense(bl, L, B.matrix))
    if not isinstance(L, Inner):
        raise StructureMismatchError("leaf L against inner right-hand side")
    l00, l10, l11 = bl.sons[0][0], bl.sons[1][0], bl.sons[1][1]
    x11 = solve_lower_left(l00, L.sons[0][0], bb.sons[0][0], B.sons[0][0], eps)
    x12 = solve_lower_left(l00, L.sons[0][0], bb.sons[0][1], B.sons[0][1], eps)
    u1 = node_multiply(l10, L.sons[1][0], bb.sons[0][0], x11, bb.sons[1][0], eps)
    u2 = node_multiply(l10, L.sons[1][0], bb.sons[0][1], x12, bb.sons[1][1], eps)
    x21 = solve_lower_left(l11, L.sons[1][1], bb.sons[1][0],
                           node_add(bb.sons[1][0], B.sons[1][0], u1, eps, -1.0),
                           eps)
    x22 = solve_lower_left(l11, L.sons[1][1], bb.sons[1][1],
                           node_add(bb.sons[1][1], B.sons[1][1], u2, eps, -1.0),
                           eps)
    return Inner(sons=[[x11, x12], [x21, x22]])


def solve_upper_left(bu: BlockNode, U: Node, bb: BlockNode, B: Node,
                     eps: float) -> Node:
    """X = U^{-1} B with U upper on a diagonal block."""
    if B is None:
        return None
    if isinstance(B, RkMatrix):
        return RkMatrix(a=solve_upper_dense(bu, U, B.a), b=B.b.copy())
    if isinstance(B, Full):
        return Full(solve_upper_dense(bu, U, B.matrix))
    if not isinstance(U, Inner):
        raise StructureMismatchError("leaf U against inner right-hand side")
    u00, u01, u11 = bu.sons[0][0], bu.sons[0][1], bu.sons[1][1]
    x21 = solve_upper_left(u11, U.sons[1][1], bb.sons[1][0], B.sons[1][0], eps)
    x22 = solve_upper_left(u11, U.sons[1][1], bb.sons[1][1], B.sons[1][1], eps)
    u1 = node_multiply(u01, U.sons[0][1], bb.sons[1][0], x21, bb.sons[0][0], eps)
    u2 = node_multiply(u01, U.sons[0][1], bb.sons[1][1], x22, bb.sons[0][1], eps)
    x11 = solve_upper_left(u00, U.sons[0][0], bb.sons[0][0],
                           node_add(bb.sons[0][0], B.sons[0][0], u1, eps, -1.0),
                           eps)
    x12 = solve_upper_left(u00, U.sons[0][0], bb.sons[0][1],
                           node_add(bb.sons[0][1], B.sons[0][1], u2, eps, -1.0),
                           eps)
    return Inner(sons=[[x11, x12], [x21, x22]])


def solve_upper_right(bu: BlockNode, U: Node, bb: BlockNode, B: Node,
                      eps: float) -> Node:
    """X = B U^{-1} with U upper on a diagonal block; B has U's column split."""
    if B is None:
        return None
    if isinstance(B, RkMatrix):
        return RkMatrix(a=B.a.copy(), b=solve_upper_transpose_dense(bu, U, B.b))
    if isinstance(B, Full):
        xt = solve_upper_transpose_dense(bu, U, B.matrix.T)
        return Full(xt.T)
    if not isinstance(U, Inner):
        raise StructureMismatchError("leaf U against inner right-hand side")
    u00, u01, u11 = bu.sons[0][0], bu.sons[0][1], bu.sons[1][1]
    x11 = solve_upper_right(u00, U.sons[0][0], bb.sons[0][0], B.sons[0][0], eps)
    x21 = solve_upper_right(u00, U.sons[0][0], bb.sons[1][0], B.sons[1][0], eps)
    u1 = node_multiply(bb.sons[0][0], x11, u01, U.sons[0][1], bb.sons[0][1], eps)
    u2 = node_multiply(bb.sons[1][0], x21, u01, U.sons[0][1], bb.sons[1][1], eps)
    x12 = solve_upper_right(u11, U.sons[1][1], bb.sons[0][1],
                            node_add(bb.sons[0][1], B.sons[0][1], u1, eps, -1.0),
                            eps)
    x22 = solve_upper_right(u11, U.sons[1][1], bb.sons[1][1],
                            node_add(bb.sons[1][1], B.sons[1][1], u2, eps, -1.0),
                            eps)
    return Inner(sons=[[x11, x12], [x21, x22]])


# --- public block elimination ----------------------------------------------


def _sub_hmatrix(H: HMatrix, i: int, j: int, root: Node | None = None) -> HMatrix:
    view = H.sub_block(i, j)
    if root is not None:
        view = dataclasses.replace(view, root=root)
    return view


@dataclasses.dataclass
class HBlockFactor:
    """Coupling and Schur complement of a root-level block elimination.

    pivot_block 0 eliminates the leading diagonal block (coupling is
    K21 K11^{-1} on the (2,1) block, schur on (2,2)); pivot_block 1 mirrors
    this (coupling K12 K22^{-1} on (1,2), schur on (1,1)).
    """

    pivot_block: int
    n1: int
    n2: int
    coupling: HMatrix
    schur: HMatrix
    _coupling_t: Node  # transpose of the coupling, kept for back-substitution

    def coupling_transpose_apply(self, X: np.ndarray) -> np.ndarray:
        """coupling^T @ X for dense X (tree order)."""
        return node_rmatvec(self.coupling.tree.root, self.coupling.root,
                            np.asarray(X, dtype=float))

    def back_transform(self, Z: np.ndarray) -> np.ndarray:
        """Apply L^{-T} to dense columns in tree order."""
        Z = np.asarray(Z, dtype=float)
        out = Z.copy()
        if self.pivot_block == 0:
            out[:self.n1] -= self.coupling_transpose_apply(Z[self.n1:])
        else:
            out[self.n1:] -= self.coupling_transpose_apply(Z[:self.n1])
        return out


def h_block_ldlt(K_h: HMatrix, epsilon: float,
                 pivot_block: int = 0) -> HBlockFactor:
    """Root-level block elimination of a square H-matrix.

    Returns the coupling in H-form and the Schur complement as an H-matrix
    on the complementary diagonal subtree.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if pivot_block not in (0, 1):
        raise ValueError("pivot_block must be 0 or 1")
    root = K_h.tree.root
    if root.is_leaf or not isinstance(K_h.root, Inner):
        raise StructureMismatchError("root must have a 2x2 block structure")
    v = K_h.root
    n1 = root.sons[0][0].row.size
    n2 = root.sons[1][1].row.size
    p, q = (0, 1) if pivot_block == 0 else (1, 0)
    bp = root.sons[p][p]
    b_pq = root.sons[p][q]       # pivot-row, other-col block of K
    b_qp = root.sons[q][p]
    bq = root.sons[q][q]
    L, U = h_lu(bp, v.sons[p][p], epsilon)
    z = solve_lower_left(bp, L, b_pq, v.sons[p][q], epsilon)
    coupling_t = solve_upper_left(bp, U, b_pq, z, epsilon)  # Kpp^{-1} Kpq
    coupling = node_transpose(coupling_t)                   # Kqp Kpp^{-1}
    update = node_multiply(b_qp, coupling, b_pq, v.sons[p][q], bq, epsilon)
    schur = node_add(bq, v.sons[q][q], update, epsilon, beta=-1.0)
    return HBlockFactor(
        pivot_block=pivot_block, n1=n1, n2=n2,
        coupling=_sub_hmatrix(K_h, q, p, coupling),
        schur=_sub_hmatrix(K_h, q, q, schur),
        _coupling_t=coupling_t)


def h_transform_mass(M_h: HMatrix, factor: HBlockFactor,
                     epsilon: float) -> HMatrix:
    """Congruence transform L^{-1} M L^{-T} in H-arithmetic.

    The pivot diagonal block is untouched; the off-diagonal blocks lose the
    coupled pivot-mass contribution and the complementary diagonal block
    collects the full update.
    """
    root = M_h.tree.root
    if root.is_leaf or not isinstance(M_h.root, Inner):
        raise StructureMismatchError("root must have a 2x2 block structure")
    v = M_h.root
    p, q = (0, 1) if factor.pivot_block == 0 else (1, 0)
    bq_p = root.sons[q][p]
    bp_q = root.sons[p][q]
    bq = root.sons[q][q]
    G = factor.coupling.root
    Gb = factor.coupling.tree.root
    Gt = factor._coupling_t  # lives on the (p, q) block
    # Mt_qp = Mqp - G Mpp ; Mt_qq = Mqq - G Mpq - (G Mpq)^T + G Mpp G^T
    g_mpp = node_multiply(Gb, G, root.sons[p][p], v.sons[p][p], bq_p, epsilon)
    mt_qp = node_add(bq_p, v.sons[q][p], g_mpp, epsilon, beta=-1.0)
    g_mpq = node_multiply(Gb, G, root.sons[p][q], v.sons[p][q], bq, epsilon)
    g_mpp_gt = node_multiply(bq_p, g_mpp, bp_q, Gt, bq, epsilon)
    mt_qq = node_add(bq, v.sons[q][q], g_mpq, epsilon, beta=-1.0)
    mt_qq = node_add(bq, mt_qq, node_transpose(g_mpq), epsilon, beta=-1.0)
    mt_qq = node_add(bq, mt_qq, g_mpp_gt, epsilon, beta=1.0)
    sons: list[list[Node]] = [[None, None], [None, None]]
    sons[p][p] = v.sons[p][p]
    sons[q][p] = mt_qp
    sons[p][q] = node_transpose(mt_qp)
    sons[q][q] = mt_qq
    return HMatrix(tree=M_h.tree, root=Inner(sons=sons),
                   row_perm=M_h.row_perm.copy(), col_perm=M_h.col_perm.copy())
