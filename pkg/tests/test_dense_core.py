import numpy as np
import pytest
import scipy.linalg

from conftest import random_pencil
from hamls import (EmptySubspaceError, NotSPDError, back_transform,
                   block_ldlt, build_problem, direct_solve,
                   orthonormalize_columns, rayleigh_ritz,
                   sym_eig_generalized, transform_mass)


def test_eig_diagonal_case():
    es = sym_eig_generalized(np.diag([3.0, -5.0, 1.0]), np.eye(3), count=2)
    np.testing.assert_allclose(es.values, [-5.0, 3.0])


def test_eig_matches_mass_scaling_oracle():
    p = build_problem(8)
    es = sym_eig_generalized(p.K, p.M)
    # independent route: symmetric scaling M^{-1/2} K M^{-1/2}
    d = 1.0 / np.sqrt(np.diag(p.M))
    w = np.linalg.eigvalsh(d[:, None] * p.K * d[None, :])
    w = w[np.argsort(-np.abs(w), kind="stable")]
    np.testing.assert_allclose(es.values, w, rtol=1e-10)


def test_eig_b_orthonormal_and_residual():
    rng = np.random.default_rng(3)
    A, B = random_pencil(rng, 12)
    es = sym_eig_generalized(A, B, count=5)
    gram = es.vectors.T @ B @ es.vectors
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-8)
    res = A @ es.vectors - B @ es.vectors @ np.diag(es.values)
    assert np.linalg.norm(res) <= 1e-8 * np.linalg.norm(A)


def test_eig_not_spd():
    with pytest.raises(NotSPDError):
        sym_eig_generalized(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_eig_magnitude_tie_break():
    es = sym_eig_generalized(np.diag([2.0, -2.0, 1.0]), np.eye(3), count=2)
    # equal magnitudes keep ascending input (eigh-sorted ascending) order
    np.testing.assert_allclose(es.values, [-2.0, 2.0])


def test_block_ldlt_decoupled():
    K = np.diag([2.0, 3.0, 4.0, 5.0])
    f = block_ldlt(K, 2)
    np.testing.assert_array_equal(f.coupling, np.zeros((2, 2)))
    np.testing.assert_array_equal(f.schur, np.diag([4.0, 5.0]))


def test_block_ldlt_hand_case():
    f = block_ldlt(np.array([[2.0, 1.0], [1.0, 2.0]]), 1)
    assert f.coupling[0, 0] == pytest.approx(0.5)
    assert f.schur[0, 0] == pytest.approx(1.5)


def test_block_ldlt_reconstruction():
    rng = np.random.default_rng(11)
    K, _ = random_pencil(rng, 10)
    f = block_ldlt(K, 4)
    L = f.expand_l()
    D = np.zeros_like(K)
    D[:4, :4] = K[:4, :4]
    D[4:, 4:] = f.schur
    err = np.linalg.norm(L @ D @ L.T - K) / np.linalg.norm(K)
    assert err <= 1e-10
    assert np.abs(f.schur - f.schur.T).max() <= 1e-12 * np.abs(f.schur).max()


def test_transform_mass_identity_when_decoupled():
    K = np.diag(np.arange(1.0, 7.0))
    M = np.eye(6) * 0.25
    f = block_ldlt(K, 3)
    np.testing.assert_array_equal(transform_mass(M, f), M)


def test_transform_mass_identity_formula():
    rng = np.random.default_rng(5)
    K, _ = random_pencil(rng, 9)
    f = block_ldlt(K, 4)
    Mt = transform_mass(np.eye(9), f)
    G = f.coupling
    np.testing.assert_allclose(Mt[4:, 4:], np.eye(5) + G @ G.T, rtol=1e-12)


def test_transform_mass_vs_congruence_oracle():
    p = build_problem(8)
    f = block_ldlt(p.K, 4)
    Mt = transform_mass(p.M, f)
    L = f.expand_l()
    ref = scipy.linalg.solve(L, scipy.linalg.solve(L, p.M.T).T)
    np.testing.assert_allclose(Mt, ref, atol=1e-12 * np.abs(ref).max())


def test_back_transform_cases():
    rng = np.random.default_rng(9)
    K, _ = random_pencil(rng, 8)
    f = block_ldlt(K, 3)
    Z = rng.standard_normal((8, 3))
    Y = back_transform(f, Z)
    np.testing.assert_allclose(f.expand_l().T @ Y, Z, atol=1e-12)
    # trailing-block rows pass through untouched
    e = np.zeros((8, 1))
    e[-1] = 1.0
    np.testing.assert_array_equal(back_transform(f, e)[3:], e[3:])
    # with no coupling the whole vector is untouched
    f0 = block_ldlt(np.diag(np.arange(1.0, 9.0)), 3)
    np.testing.assert_array_equal(back_transform(f0, e), e)


def test_orthonormalize_duplicate_column():
    v = np.ones(5) / np.sqrt(5)
    Q = orthonormalize_columns(np.column_stack([v, v]))
    assert Q.shape == (5, 1)
    assert abs(abs(v @ Q[:, 0]) - 1.0) < 1e-12


def test_orthonormalize_preserves_orthonormal_input():
    rng = np.random.default_rng(1)
    Q0 = np.linalg.qr(rng.standard_normal((12, 5)))[0]
    Q = orthonormalize_columns(Q0)
    np.testing.assert_allclose(Q, Q0, atol=1e-12)


def test_orthonormalize_all_dropped():
    with pytest.raises(EmptySubspaceError):
        orthonormalize_columns(np.zeros((4, 3)))


def test_orthonormalize_rank_reveal():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((20, 4))
    Q = orthonormalize_columns(np.hstack([B, B @ rng.standard_normal((4, 3))]))
    assert Q.shape[1] == 4
    np.testing.assert_allclose(Q.T @ Q, np.eye(4), atol=1e-12)


def test_rayleigh_ritz_full_identity_basis():
    rng = np.random.default_rng(4)
    K, M = random_pencil(rng, 7)
    pairs = rayleigh_ritz(K, M, np.eye(7), 7)
    es = sym_eig_generalized(K, M)
    np.testing.assert_allclose(pairs.values, es.values, rtol=1e-12)


def test_rayleigh_ritz_invariant_subspace():
    rng = np.random.default_rng(6)
    K, M = random_pencil(rng, 7)
    es = sym_eig_generalized(K, M, count=1)
    pairs = rayleigh_ritz(K, M, es.vectors, 1)
    assert pairs.values[0] == pytest.approx(es.values[0], rel=1e-10)


def test_ritz_containment_and_monotone_enrichment():
    rng = np.random.default_rng(8)
    for _ in range(10):
        K, M = random_pencil(rng, 10, spd_k=True)
        es = sym_eig_generalized(K, M)
        lo, hi = es.values.min(), es.values.max()
        Q = orthonormalize_columns(rng.standard_normal((10, 3)))
        pairs = rayleigh_ritz(K, M, Q, 3)
        assert np.all(pairs.values >= lo - 1e-10)
        assert np.all(pairs.values <= hi + 1e-10)
        Q2 = orthonormalize_columns(
            np.hstack([Q, rng.standard_normal((10, 2))]))
        enriched = rayleigh_ritz(K, M, Q2, 3)
        assert enriched.values[0] >= pairs.values[0] - 1e-10


def test_pencil_equivalence_small_sample():
    rng = np.random.default_rng(12)
    for _ in range(10):
        n = int(rng.integers(4, 20))
        n1 = int(rng.integers(1, n))
        K, M = random_pencil(rng, n)
        f = block_ldlt(K, n1)
        Mt = transform_mass(M, f)
        Kt = np.zeros_like(K)
        Kt[:n1, :n1] = K[:n1, :n1]
        Kt[n1:, n1:] = f.schur
        w_ref = np.sort(scipy.linalg.eigh(K, M, eigvals_only=True))
        w_t = np.sort(scipy.linalg.eigh(Kt, Mt, eigvals_only=True))
        np.testing.assert_allclose(w_t, w_ref,
                                   rtol=1e-9 * max(1, np.abs(w_ref).max()))


def test_direct_solve_sign_convention():
    p = build_problem(16)
    pairs = direct_solve(p.K, p.M, 4)
    for j in range(4):
        v = pairs.vectors[:, j]
        assert v[np.argmax(np.abs(v))] > 0


def test_eig_smallest_magnitude_selection():
    es = sym_eig_generalized(np.diag([3.0, -5.0, 1.0, 0.25]), np.eye(4),
                             count=2, which="smallest_magnitude")
    np.testing.assert_allclose(es.values, [1.0, 0.25])


def test_pencil_equivalence_on_assembled_problem():
    p = build_problem(8)
    f = block_ldlt(p.K, 4)
    Mt = transform_mass(p.M, f)
    Kt = np.zeros_like(p.K)
    Kt[:4, :4] = p.K[:4, :4]
    Kt[4:, 4:] = f.schur
    w_ref = np.sort(scipy.linalg.eigh(p.K, p.M, eigvals_only=True))
    w_t = np.sort(scipy.linalg.eigh(Kt, Mt, eigvals_only=True))
    np.testing.assert_allclose(w_t, w_ref, atol=1e-10 * np.abs(w_ref).max())
