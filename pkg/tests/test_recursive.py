import numpy as np
import pytest

from hamls import (AmlsConfig, FullRank, PowerRank, RecursionLimitError,
                   build_problem, combined_dense_amls_solve, direct_solve,
                   hamls_solve)
from hamls.bench import build_hmatrices


def make_h_pencil(n, eps=1e-10, n_min=32):
    p = build_problem(n)
    K_h, M_h = build_hmatrices(p, 1.0, n_min, eps)
    return p, K_h, M_h


def test_base_case_bit_compatible_with_direct():
    p, K_h, M_h = make_h_pencil(64, eps=1e-14, n_min=64)
    config = AmlsConfig(k_rule=FullRank(), n_es=10, recursion_threshold=64)
    pairs = hamls_solve(K_h, M_h, config)
    K = K_h.to_dense()
    M = M_h.to_dense()
    ref = direct_solve(0.5 * (K + K.T), 0.5 * (M + M.T), 10)
    np.testing.assert_array_equal(pairs.values, ref.values)
    np.testing.assert_array_equal(pairs.vectors, ref.vectors)


def test_full_selection_matches_direct():
    p, K_h, M_h = make_h_pencil(256)
    config = AmlsConfig(k_rule=FullRank(), n_es=10, h_accuracy=1e-10)
    pairs = hamls_solve(K_h, M_h, config)
    ref = direct_solve(p.K, p.M, 10)
    np.testing.assert_allclose(pairs.values, ref.values, rtol=1e-6)


def test_matches_single_level_combined():
    # exact recursive subsolves (threshold = n/2) reduce the method to the
    # single-level two-orientation solver with the same mode counts
    n = 256
    p, K_h, M_h = make_h_pencil(n)
    rule = PowerRank(2.0, 1.0 / 3.0)
    config = AmlsConfig(k_rule=rule, n_es=8, h_accuracy=1e-10,
                        recursion_threshold=n // 2)
    pairs = hamls_solve(K_h, M_h, config)
    ref = combined_dense_amls_solve(p, 0.5,
                                    AmlsConfig(k_rule=rule, n_es=8))
    np.testing.assert_allclose(pairs.values, ref.values, rtol=1e-4)


def test_four_subproblems_per_level():
    _, K_h, M_h = make_h_pencil(256)
    trace: list = []
    config = AmlsConfig(k_rule=PowerRank(2.0, 1.0 / 3.0), n_es=6,
                        h_accuracy=1e-8, recursion_threshold=64)
    hamls_solve(K_h, M_h, config, trace=trace)
    by_depth = {}
    for rec in trace:
        by_depth.setdefault(rec["depth"], 0)
        by_depth[rec["depth"]] += 1
    assert by_depth[0] == 1
    assert by_depth[1] == 4  # two orientations x two subproblems
    for rec in trace:
        assert {"depth", "n", "k1", "k2", "k_bar", "dropped_columns",
                "wall_time"} <= set(rec)


def test_residual_trend_under_eps_refinement():
    n = 256
    p = build_problem(n)
    rule = PowerRank(2.0, 1.0 / 3.0)
    residuals = []
    for eps in (1e-4, 1e-6, 1e-8, 1e-10):
        K_h, M_h = build_hmatrices(p, 1.0, 32, eps)
        config = AmlsConfig(k_rule=rule, n_es=6, h_accuracy=eps)
        pairs = hamls_solve(K_h, M_h, config)
        r = p.K @ pairs.vectors - p.M @ pairs.vectors @ np.diag(pairs.values)
        residuals.append(np.linalg.norm(r, axis=0).max()
                         / np.linalg.norm(p.K, 2))
    inversions = [(a, b) for a, b in zip(residuals, residuals[1:]) if b > a]
    if inversions:
        print(f"tolerated residual inversions: {inversions}")
    for a, b in zip(residuals, residuals[1:]):
        assert b <= 2.0 * a
    assert residuals[-1] <= 2.0 * residuals[0]


def test_recursion_depth_cap():
    _, K_h, M_h = make_h_pencil(64, n_min=16)
    config = AmlsConfig(k_rule=FullRank(), n_es=4)
    with pytest.raises(RecursionLimitError):
        hamls_solve(K_h, M_h, config, depth=65)


def test_vectors_m_orthonormal():
    p, K_h, M_h = make_h_pencil(256)
    config = AmlsConfig(k_rule=PowerRank(2.0, 1.0 / 3.0), n_es=6,
                        h_accuracy=1e-10)
    pairs = hamls_solve(K_h, M_h, config)
    gram = pairs.vectors.T @ p.M @ pairs.vectors
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-7)


def test_full_selection_non_dyadic_sizes():
    # uneven geometric bisections and deep recursion
    for n, nmin, thr in [(96, 8, 16), (150, 8, 12)]:
        p = build_problem(n)
        K_h, M_h = build_hmatrices(p, 1.0, nmin, 1e-10)
        config = AmlsConfig(k_rule=FullRank(), n_es=6, h_accuracy=1e-10,
                            recursion_threshold=thr, n_min=nmin)
        pairs = hamls_solve(K_h, M_h, config)
        ref = direct_solve(p.K, p.M, 6)
        np.testing.assert_allclose(pairs.values, ref.values, rtol=1e-6)
