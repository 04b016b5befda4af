"""Geometric cluster trees and admissibility-driven block trees.

Index sets are bisected at the geometric midpoint of their bounding
interval until they fall below the leaf threshold; block pairs are split
until they satisfy min{diam} <= eta * dist or one side reaches a leaf.
"""

from __future__ import annotations

import dataclasses

import numpy as np

ADMISSIBLE = "admissible"
DENSE = "dense"
INNER = "inner"


@dataclasses.dataclass
class ClusterNode:
    """Contiguous index range (in tree order) with its bounding interval."""

    start: int
    size: int
    lo: float
    hi: float
    depth: int
    sons: list["ClusterNode"] = dataclasses.field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.sons

    @property
    def diameter(self) -> float:
        return self.hi - self.lo


@dataclasses.dataclass
class ClusterTree:
    """Root node plus the permutation tree slot -> original index."""

    root: ClusterNode
    perm: np.ndarray
    n_min: int

    @property
    def size(self) -> int:
        return self.root.size

    def depth(self) -> int:
        def walk(node):
            return node.depth if node.is_leaf else max(map(walk, node.sons))
        return walk(self.root)

    def leaves(self) -> list[ClusterNode]:
        out: list[ClusterNode] = []
        def walk(node):
            if node.is_leaf:
                out.append(node)
            else:
                for s in node.sons:
                    walk(s)
        walk(self.root)
        return out


def build_cluster_tree(points: np.ndarray, n_min: int,
                       support_radius: float = 0.0) -> ClusterTree:
    """Recursive geometric bisection of 1D points.

    ``support_radius`` pads the root interval (half a cell width for
    midpoint nodal points) so that cluster intervals reflect basis supports;
    son intervals are always the exact halves of the parent interval.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size == 0:
        raise ValueError("points must be a non-empty 1d array")
    if n_min < 1:
        raise ValueError(f"n_min must be >= 1, got {n_min}")
    order = np.argsort(points, kind="stable")
    sorted_pts = points[order]
    lo = float(sorted_pts[0] - support_radius)
    hi = float(sorted_pts[-1] + support_radius)

    def build(start: int, size: int, lo: float, hi: float, depth: int) -> ClusterNode:
        node = ClusterNode(start=start, size=size, lo=lo, hi=hi, depth=depth)
        if size <= n_min:
            return node
        mid = 0.5 * (lo + hi)
        cut = int(np.searchsorted(sorted_pts[start:start + size], mid))
        if cut == 0 or cut == size:
            return node  # indivisible: all points on one side of the midpoint
        node.sons = [build(start, cut, lo, mid, depth + 1),
                     build(start + cut, size - cut, mid, hi, depth + 1)]
        return node

    root = build(0, points.size, lo, hi, 0)
    return ClusterTree(root=root, perm=order, n_min=n_min)


def is_admissible(s: ClusterNode, t: ClusterNode, eta: float) -> bool:
    dist = max(0.0, max(t.lo - s.hi, s.lo - t.hi))
    return min(s.diameter, t.diameter) <= eta * dist


@dataclasses.dataclass
class BlockNode:
    """Pairing of two cluster nodes with its leaf/inner classification."""

    row: ClusterNode
    col: ClusterNode
    kind: str
    sons: list[list["BlockNode"]] | None = None  # 2x2: sons[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.row.size, self.col.size

    @property
    def is_leaf(self) -> bool:
        return self.sons is None


@dataclasses.dataclass
class BlockClusterTree:
    root: BlockNode
    row_tree: ClusterTree
    col_tree: ClusterTree
    eta: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.root.shape


def build_block_tree(row_tree: ClusterTree, col_tree: ClusterTree,
                     eta: float = 1.0) -> BlockClusterTree:
    """Subdivide row x col pairs until admissible or one side is a leaf."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")

    def build(s: ClusterNode, t: ClusterNode) -> BlockNode:
        if is_admissible(s, t, eta):
            return BlockNode(row=s, col=t, kind=ADMISSIBLE)
        if s.is_leaf or t.is_leaf:
            return BlockNode(row=s, col=t, kind=DENSE)
        sons = [[build(si, tj) for tj in t.sons] for si in s.sons]
        return BlockNode(row=s, col=t, kind=INNER, sons=sons)

    return BlockClusterTree(root=build(row_tree.root, col_tree.root),
                            row_tree=row_tree, col_tree=col_tree, eta=eta)


def block_leaves(node: BlockNode) -> list[BlockNode]:
    if node.is_leaf:
        return [node]
    out: list[BlockNode] = []
    for row in node.sons:
        for b in row:
            out.extend(block_leaves(b))
    return out
