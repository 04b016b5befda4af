"""Hierarchical matrices: structure, construction and formatted arithmetic.

An HMatrix mirrors a block cluster tree exactly: low-rank leaves at
admissible blocks, dense leaves at small inadmissible blocks, and 2x2 inner
nodes elsewhere.  ``None`` is used throughout as a structural zero block.
Formatted operations (add, multiply) perform the exact blockwise operation
and re-truncate low-rank leaves to the requested accuracy.
"""

from __future__ import annotations

import dataclasses
from typing import Union

import numpy as np

from ..errors import StructureMismatchError
from .cluster import (ADMISSIBLE, DENSE, INNER, BlockClusterTree, BlockNode,
                      ClusterTree)
from .rk import RkMatrix, rk_join, rk_recompress, rk_truncate


@dataclasses.dataclass
class Full:
    """Dense leaf block."""

    matrix: np.ndarray


@dataclasses.dataclass
class Inner:
    """2x2 block node; sons[i][j] may be Full, RkMatrix, Inner or None."""

    sons: list[list["Node"]]


Node = Union[Full, RkMatrix, Inner, None]


# ---------------------------------------------------------------------------
# structural recursions


def node_to_dense(b: BlockNode, v: Node) -> np.ndarray:
    n, m = b.shape
    if v is None:
        return np.zeros((n, m))
    if isinstance(v, Full):
        return v.matrix.copy()
    if isinstance(v, RkMatrix):
        return v.to_dense()
    out = np.empty((n, m))
    r = b.sons[0][0].row.size
    c = b.sons[0][0].col.size
    out[:r, :c] = node_to_dense(b.sons[0][0], v.sons[0][0])
    out[:r, c:] = node_to_dense(b.sons[0][1], v.sons[0][1])
    out[r:, :c] = node_to_dense(b.sons[1][0], v.sons[1][0])
    out[r:, c:] = node_to_dense(b.sons[1][1], v.sons[1][1])
    return out


def node_matvec(b: BlockNode, v: Node, X: np.ndarray) -> np.ndarray:
    """Apply the block to column vectors X (cols x p -> rows x p)."""
    if v is None:
        return np.zeros((b.row.size, X.shape[1]))
    if isinstance(v, Full):
        return v.matrix @ X
    if isinstance(v, RkMatrix):
        return v.a @ (v.b.T @ X)
    c = b.sons[0][0].col.size
    top = (node_matvec(b.sons[0][0], v.sons[0][0], X[:c])
           + node_matvec(b.sons[0][1], v.sons[0][1], X[c:]))
    bot = (node_matvec(b.sons[1][0], v.sons[1][0], X[:c])
           + node_matvec(b.sons[1][1], v.sons[1][1], X[c:]))
    return np.vstack([top, bot])


def node_rmatvec(b: BlockNode, v: Node, X: np.ndarray) -> np.ndarray:
    """Apply the transposed block to column vectors (rows x p -> cols x p)."""
    if v is None:
        return np.zeros((b.col.size, X.shape[1]))
    if isinstance(v, Full):
        return v.matrix.T @ X
    if isinstance(v, RkMatrix):
        return v.b @ (v.a.T @ X)
    r = b.sons[0][0].row.size
    left = (node_rmatvec(b.sons[0][0], v.sons[0][0], X[:r])
            + node_rmatvec(b.sons[1][0], v.sons[1][0], X[r:]))
    right = (node_rmatvec(b.sons[0][1], v.sons[0][1], X[:r])
             + node_rmatvec(b.sons[1][1], v.sons[1][1], X[r:]))
    return np.vstack([left, right])


def node_transpose(v: Node) -> Node:
    if v is None:
        return None
    if isinstance(v, Full):
        return Full(v.matrix.T.copy())
    if isinstance(v, RkMatrix):
        return RkMatrix(a=v.b.copy(), b=v.a.copy())
    s = v.sons
    return Inner(sons=[[node_transpose(s[0][0]), node_transpose(s[1][0])],
                       [node_transpose(s[0][1]), node_transpose(s[1][1])]])


def node_scale(v: Node, alpha: float) -> Node:
    if v is None:
        return None
    if isinstance(v, Full):
        return Full(alpha * v.matrix)
    if isinstance(v, RkMatrix):
        return RkMatrix(a=alpha * v.a, b=v.b.copy())
    return Inner(sons=[[node_scale(x, alpha) for x in row] for row in v.sons])


def _agglomerate(n: int, m: int, r: int, c: int,
                 quads: list[list[RkMatrix]], eps: float) -> RkMatrix:
    """Merge 2x2 factored quadrants (row split r, col split c) into one."""
    total = sum(q.rank for row in quads for q in row)
    a = np.zeros((n, total))
    bt = np.zeros((m, total))
    ofs = 0
    row_sl = [slice(0, r), slice(r, n)]
    col_sl = [slice(0, c), slice(c, m)]
    for i in range(2):
        for j in range(2):
            q = quads[i][j]
            a[row_sl[i], ofs:ofs + q.rank] = q.a
            bt[col_sl[j], ofs:ofs + q.rank] = q.b
            ofs += q.rank
    return rk_recompress(a, bt, eps)


def node_to_rk(b: BlockNode, v: Node, eps: float) -> RkMatrix:
    """Factored approximation of an arbitrary node (agglomeration)."""
    if v is None:
        return RkMatrix.zero(*b.shape)
    if isinstance(v, RkMatrix):
        return v
    if isinstance(v, Full):
        return rk_truncate(v.matrix, eps)
    quads = [[node_to_rk(b.sons[i][j], v.sons[i][j], eps) for j in range(2)]
             for i in range(2)]
    n, m = b.shape
    return _agglomerate(n, m, b.sons[0][0].row.size, b.sons[0][0].col.size,
                        quads, eps)


def format_dense(b: BlockNode, A: np.ndarray, eps: float) -> Node:
    """Press a dense block into the structure rooted at b."""
    if b.kind == ADMISSIBLE:
        return rk_truncate(A, eps)
    if b.kind == DENSE:
        return Full(np.array(A, dtype=float))
    r = b.sons[0][0].row.size
    c = b.sons[0][0].col.size
    return Inner(sons=[
        [format_dense(b.sons[0][0], A[:r, :c], eps),
         format_dense(b.sons[0][1], A[:r, c:], eps)],
        [format_dense(b.sons[1][0], A[r:, :c], eps),
         format_dense(b.sons[1][1], A[r:, c:], eps)]])


def format_rk(b: BlockNode, a: np.ndarray, bt: np.ndarray, eps: float) -> Node:
    """Press a factored block a @ bt.T into the structure rooted at b."""
    if b.kind == ADMISSIBLE:
        return rk_recompress(a, bt, eps)
    if b.kind == DENSE:
        return Full(a @ bt.T)
    r = b.sons[0][0].row.size
    c = b.sons[0][0].col.size
    return Inner(sons=[
        [format_rk(b.sons[0][0], a[:r], bt[:c], eps),
         format_rk(b.sons[0][1], a[:r], bt[c:], eps)],
        [format_rk(b.sons[1][0], a[r:], bt[:c], eps),
         format_rk(b.sons[1][1], a[r:], bt[c:], eps)]])


def node_add(b: BlockNode, x: Node, y: Node, eps: float,
             beta: float = 1.0) -> Node:
    """Formatted x + beta*y on the structure rooted at b."""
    if y is None:
        return x
    if x is None:
        return node_scale(y, beta) if beta != 1.0 else y
    if b.kind == ADMISSIBLE:
        assert isinstance(x, RkMatrix) and isinstance(y, RkMatrix)
        return rk_join(x, RkMatrix(a=beta * y.a, b=y.b), eps)
    if b.kind == DENSE:
        assert isinstance(x, Full) and isinstance(y, Full)
        return Full(x.matrix + beta * y.matrix)
    assert isinstance(x, Inner) and isinstance(y, Inner)
    return Inner(sons=[
        [node_add(b.sons[i][j], x.sons[i][j], y.sons[i][j], eps, beta)
         for j in range(2)] for i in range(2)])


def multiply_to_rk(bx: BlockNode, x: Node, by: BlockNode, y: Node,
                   eps: float) -> RkMatrix:
    """Factored product of two blocks (s x t) @ (t x u)."""
    ns, nt = bx.shape
    nu = by.col.size
    if x is None or y is None:
        return RkMatrix.zero(ns, nu)
    if isinstance(x, RkMatrix):
        return RkMatrix(a=x.a.copy(), b=node_rmatvec(by, y, x.b))
    if isinstance(y, RkMatrix):
        return RkMatrix(a=node_matvec(bx, x, y.a), b=y.b.copy())
    if isinstance(x, Full):
        if nt <= ns:
            return RkMatrix(a=x.matrix.copy(),
                            b=node_rmatvec(by, y, np.eye(nt)))
        d = node_rmatvec(by, y, x.matrix.T).T  # ns x nu with ns small
        return RkMatrix(a=np.eye(ns), b=d.T)
    if isinstance(y, Full):
        if nt <= nu:
            return RkMatrix(a=node_matvec(bx, x, np.eye(nt)),
                            b=y.matrix.T.copy())
        d = node_matvec(bx, x, y.matrix)  # ns x nu with nu small
        return RkMatrix(a=d, b=np.eye(nu))
    # both inner: quadrant products, then agglomerate
    quads = []
    for i in range(2):
        row = []
        for k in range(2):
            p1 = multiply_to_rk(bx.sons[i][0], x.sons[i][0],
                                by.sons[0][k], y.sons[0][k], eps)
            p2 = multiply_to_rk(bx.sons[i][1], x.sons[i][1],
                                by.sons[1][k], y.sons[1][k], eps)
            row.append(rk_join(p1, p2, eps))
        quads.append(row)
    return _agglomerate(ns, nu, bx.sons[0][0].row.size,
                        by.sons[0][0].col.size, quads, eps)


def node_multiply(bx: BlockNode, x: Node, by: BlockNode, y: Node,
                  bt: BlockNode, eps: float) -> Node:
    """Formatted product pressed into the target structure rooted at bt."""
    if x is None or y is None:
        return None
    if bt.kind == INNER and isinstance(x, Inner) and isinstance(y, Inner):
        sons = []
        for i in range(2):
            row = []
            for k in range(2):
                p1 = node_multiply(bx.sons[i][0], x.sons[i][0],
                                   by.sons[0][k], y.sons[0][k],
                                   bt.sons[i][k], eps)
                p2 = node_multiply(bx.sons[i][1], x.sons[i][1],
                                   by.sons[1][k], y.sons[1][k],
                                   bt.sons[i][k], eps)
                row.append(node_add(bt.sons[i][k], p1, p2, eps))
            sons.append(row)
        return Inner(sons=sons)
    r = multiply_to_rk(bx, x, by, y, eps)
    if r.rank == 0:
        return None
    return format_rk(bt, r.a, r.b, eps)


# ---------------------------------------------------------------------------
# public wrapper


@dataclasses.dataclass(frozen=True)
class StorageStats:
    """Exact storage accounting: dense n*m, low-rank k*(n+m) reals."""

    stored_reals: int
    max_rank: int
    compression_ratio: float


@dataclasses.dataclass
class HMatrix:
    """Block matrix over a block cluster tree with a row/col permutation.

    ``row_perm``/``col_perm`` map tree position -> external index, so
    ``to_dense()`` and ``matvec`` speak the caller's original ordering by
    default; sub-block views use local (tree-order) indexing.
    """

    tree: BlockClusterTree
    root: Node
    row_perm: np.ndarray
    col_perm: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.tree.shape

    def to_dense(self, order: str = "original") -> np.ndarray:
        D = node_to_dense(self.tree.root, self.root)
        if order == "tree":
            return D
        out = np.empty_like(D)
        out[np.ix_(self.row_perm, self.col_perm)] = D
        return out

    def matvec(self, X: np.ndarray, order: str = "original") -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        Xc = X[:, None] if single else X
        if order == "original":
            Xc = Xc[self.col_perm]
        Y = node_matvec(self.tree.root, self.root, Xc)
        if order == "original":
            out = np.empty_like(Y)
            out[self.row_perm] = Y
            Y = out
        return Y[:, 0] if single else Y

    def rmatvec(self, X: np.ndarray, order: str = "original") -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        Xc = X[:, None] if single else X
        if order == "original":
            Xc = Xc[self.row_perm]
        Y = node_rmatvec(self.tree.root, self.root, Xc)
        if order == "original":
            out = np.empty_like(Y)
            out[self.col_perm] = Y
            Y = out
        return Y[:, 0] if single else Y

    def transpose(self) -> "HMatrix":
        if self.tree.row_tree is not self.tree.col_tree:
            raise StructureMismatchError(
                "transpose needs a square tree over one cluster tree")
        return HMatrix(tree=self.tree, root=node_transpose(self.root),
                       row_perm=self.col_perm.copy(),
                       col_perm=self.row_perm.copy())

    def sub_block(self, i: int, j: int) -> "HMatrix":
        """Local-order view of root son (i, j); needs an inner root."""
        if self.tree.root.is_leaf:
            raise StructureMismatchError("root has no sons")
        b = self.tree.root.sons[i][j]
        rt = ClusterTree(root=b.row, perm=np.arange(b.row.size),
                         n_min=self.tree.row_tree.n_min)
        ct = rt if b.col is b.row else ClusterTree(
            root=b.col, perm=np.arange(b.col.size),
            n_min=self.tree.col_tree.n_min)
        sub = BlockClusterTree(root=b, row_tree=rt, col_tree=ct,
                               eta=self.tree.eta)
        return HMatrix(tree=sub, root=self.root.sons[i][j],
                       row_perm=np.arange(b.row.size),
                       col_perm=np.arange(b.col.size))

    def stats(self) -> StorageStats:
        return storage_stats(self)

    def block_report(self) -> list[dict]:
        """Flat JSON-friendly description: coordinates, kind, rank, depth."""
        rows: list[dict] = []

        def walk(b: BlockNode, v: Node, depth: int):
            entry = {
                "row_start": b.row.start, "row_size": b.row.size,
                "col_start": b.col.start, "col_size": b.col.size,
                "kind": b.kind, "depth": depth,
            }
            if b.kind == ADMISSIBLE:
                entry["rank"] = 0 if v is None else v.rank
            if b.kind == INNER and isinstance(v, Inner):
                rows.append(entry)
                for i in range(2):
                    for j in range(2):
                        walk(b.sons[i][j], v.sons[i][j], depth + 1)
            else:
                rows.append(entry)

        walk(self.tree.root, self.root, 0)
        return rows


def _structure_signature(b: BlockNode) -> tuple:
    if b.is_leaf:
        return (b.kind, b.row.size, b.col.size)
    return (b.kind, tuple(_structure_signature(s) for row in b.sons
                          for s in row))


def _check_conforming(A: HMatrix, B: HMatrix) -> None:
    if A.tree is B.tree:
        return
    if _structure_signature(A.tree.root) != _structure_signature(B.tree.root):
        raise StructureMismatchError("operand block structures differ")


def hmatrix_approximate(entry_source, bct: BlockClusterTree,
                        epsilon: float) -> HMatrix:
    """Compress a matrix into H-form over the given block cluster tree.

    ``entry_source`` is either a dense ndarray in original index order or a
    callable ``f(rows, cols) -> ndarray`` evaluated lazily per block (rows
    and cols are original-index arrays).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    rp = bct.row_tree.perm
    cp = bct.col_tree.perm
    if callable(entry_source):
        source = entry_source
    else:
        A = np.asarray(entry_source, dtype=float)
        if A.shape != bct.shape:
            raise ValueError(f"matrix shape {A.shape} != tree {bct.shape}")
        source = lambda rows, cols: A[np.ix_(rows, cols)]

    def build(b: BlockNode) -> Node:
        rows = rp[b.row.start:b.row.start + b.row.size]
        cols = cp[b.col.start:b.col.start + b.col.size]
        if b.kind == ADMISSIBLE:
            r = rk_truncate(source(rows, cols), epsilon)
            return None if r.rank == 0 else r
        if b.kind == DENSE:
            return Full(np.array(source(rows, cols), dtype=float))
        return Inner(sons=[[build(b.sons[i][j]) for j in range(2)]
                           for i in range(2)])

    return HMatrix(tree=bct, root=build(bct.root), row_perm=rp.copy(),
                   col_perm=cp.copy())


def h_matvec(H: HMatrix, x: np.ndarray) -> np.ndarray:
    """Exact product of the stored matrix with a vector (original order)."""
    return H.matvec(x)


def h_add(A: HMatrix, B: HMatrix, epsilon: float) -> HMatrix:
    """Formatted sum of two conforming H-matrices."""
    _check_conforming(A, B)
    return HMatrix(tree=A.tree,
                   root=node_add(A.tree.root, A.root, B.root, epsilon),
                   row_perm=A.row_perm.copy(), col_perm=A.col_perm.copy())


def h_multiply(A: HMatrix, B: HMatrix, epsilon: float) -> HMatrix:
    """Formatted product of two conforming square H-matrices."""
    _check_conforming(A, B)
    root = node_multiply(A.tree.root, A.root, B.tree.root, B.root,
                         A.tree.root, epsilon)
    return HMatrix(tree=A.tree, root=root, row_perm=A.row_perm.copy(),
                   col_perm=B.col_perm.copy())


def storage_stats(H: HMatrix) -> StorageStats:
    """Count stored reals (dense n*m, factored k*(n+m)) and the max rank."""
    stored = 0
    max_rank = 0

    def walk(b: BlockNode, v: Node):
        nonlocal stored, max_rank
        n, m = b.shape
        if v is None:
            return
        if isinstance(v, Full):
            stored += n * m
        elif isinstance(v, RkMatrix):
            stored += v.rank * (n + m)
            max_rank = max(max_rank, v.rank)
        else:
            for i in range(2):
                for j in range(2):
                    walk(b.sons[i][j], v.sons[i][j])

    walk(H.tree.root, H.root)
    n, m = H.shape
    return StorageStats(stored_reals=stored, max_rank=max_rank,
                        compression_ratio=stored / float(n * m))
