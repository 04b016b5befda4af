"""Eigensolvers for dense pencils from integral-operator discretisations.

Public surface: 1D Galerkin assembly (grid), dense linear-algebra
primitives (dense_core), the single-split and two-orientation
substructuring solvers (amls, combined), the hierarchical-matrix subsystem
(hmatrix) with its recursive solver (recursive), and benchmark drivers with
a CLI (bench, cli).
"""

from .amls import (OMEGA1_FIRST, OMEGA2_FIRST, AmlsConfig, FixedRank,
                   FullRank, Partition, PowerRank, dense_amls_solve,
                   partition_indices)
from .bench import (ErrorReport, ErrorRow, benchmark_table, compute_reference,
                    discrete_spectrum, make_error_report, solve_variant)
from .combined import combined_dense_amls_solve, half_subspace
from .dense_core import (BlockLDLT, PartialEigensolution, RitzPairs,
                         back_transform, block_ldlt, direct_solve,
                         orthonormalize_columns, rayleigh_ritz,
                         sym_eig_generalized, transform_mass)
from .errors import (AmlsError, EigenSolveError, EmptySubspaceError,
                     NotSPDError, QuadratureError, RecursionLimitError,
                     SingularBlockError, StructureMismatchError)
from .grid import (DiscreteProblem, Grid1D, KernelSpec, assemble_mass,
                   assemble_stiffness, build_grid, build_problem,
                   custom_kernel, log_kernel, sample_eigenfunction,
                   stiffness_entry)
from .hmatrix import (HMatrix, RkMatrix, build_block_tree, build_cluster_tree,
                      h_add, h_block_ldlt, h_matvec, h_multiply,
                      h_transform_mass, hmatrix_approximate, rk_truncate,
                      storage_stats)
from .recursive import hamls_solve

__version__ = "0.1.0"
