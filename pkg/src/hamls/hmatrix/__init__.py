"""Hierarchical-matrix subsystem: trees, compression, arithmetic, factorisation."""

from .cluster import (ADMISSIBLE, DENSE, INNER, BlockClusterTree, BlockNode,
                      ClusterNode, ClusterTree, block_leaves, build_block_tree,
                      build_cluster_tree, is_admissible)
from .core import (Full, HMatrix, Inner, StorageStats, h_add, h_matvec,
                   h_multiply, hmatrix_approximate, storage_stats)
from .factor import HBlockFactor, h_block_ldlt, h_lu, h_transform_mass
from .rk import RkMatrix, rk_join, rk_recompress, rk_truncate

__all__ = [
    "ADMISSIBLE", "DENSE", "INNER",
    "BlockClusterTree", "BlockNode", "ClusterNode", "ClusterTree",
    "Full", "HBlockFactor", "HMatrix", "Inner", "RkMatrix", "StorageStats",
    "block_leaves", "build_block_tree", "build_cluster_tree", "h_add",
    "h_block_ldlt", "h_lu", "h_matvec", "h_multiply", "h_transform_mass",
    "hmatrix_approximate", "is_admissible", "rk_join", "rk_recompress",
    "rk_truncate", "storage_stats",
]
