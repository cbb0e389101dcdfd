"""Truncated shift models, flag operators and their holomorphic frames."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdflags.errors import AccuracyError, DomainError, ParameterError
from cdflags.flags import (FlagOperator, build_flag, build_flag2, build_jet_model, build_shift_block,
                           canonical_intertwiner, direct_sum, kernel_frame, random_phases)
from cdflags.harness import random_flag
from cdflags.kernels import binomial_kernel, coefficient_kernel, exponential_kernel


def test_szego_block_is_unweighted_shift():
    b = build_shift_block(binomial_kernel(1), 4)
    np.testing.assert_allclose(b.matrix, np.eye(4, k=1))


def test_bergman_block_weights():
    b = build_shift_block(binomial_kernel(2), 3)
    np.testing.assert_allclose(b.weights, [np.sqrt(1 / 2), np.sqrt(2 / 3)], rtol=1e-14)


def test_two_dimensional_block():
    K = coefficient_kernel([2.0, 5.0, 1.0])
    np.testing.assert_allclose(build_shift_block(K, 2).matrix, [[0, np.sqrt(2 / 5)], [0, 0]])


def test_block_size_limited_by_truncation():
    with pytest.raises(ParameterError):
        build_shift_block(binomial_kernel(1, degree=10), 11)
    with pytest.raises(ParameterError):
        build_shift_block(binomial_kernel(1), 1)


@pytest.mark.parametrize("lam", [0.5, 1, 3])
def test_block_kernel_vector_is_eigenvector(lam):
    b = build_shift_block(binomial_kernel(lam), 32)
    w = 0.4 - 0.2j
    t = b.section(w)
    r = b.matrix @ t - w * t
    # exact except in the last (truncation) row
    assert np.abs(r[:-1]).max() < 1e-14 * np.abs(t).max()
    np.testing.assert_allclose(np.abs(t) ** 2, b.kernel.coeffs[:32] * abs(w) ** (2 * np.arange(32)), rtol=1e-12)


def test_canonical_intertwiner_maps_sections():
    K0, K1 = binomial_kernel(1), binomial_kernel(3)
    S = canonical_intertwiner(K0, K1, 8)
    a0, a1 = K0.coeffs[:8], K1.coeffs[:8]
    np.testing.assert_allclose(np.diag(S).real, np.sqrt(a0 / a1), rtol=1e-14)
    T = build_flag2(K0, K1, 1.0, 8)
    R = T.blocks[0].matrix @ S - S @ T.blocks[1].matrix
    assert np.abs(R[:-1]).max() < 1e-14
    w = 0.3j
    np.testing.assert_allclose(S @ T.blocks[1].section(w), T.blocks[0].section(w), rtol=1e-13)


def test_equal_kernels_give_identity_intertwiner():
    K = binomial_kernel(1.5)
    T = build_flag2(K, K, 1.0, 10)
    np.testing.assert_allclose(T.intertwiners[(0, 1)], np.eye(10))


def test_zero_multiplier_rejected():
    K = binomial_kernel(1)
    with pytest.raises(ParameterError):
        build_flag2(K, K, 0.0, 8)
    with pytest.raises(ParameterError):
        build_jet_model(K, [1.0, -1.0], 8)


def test_missing_or_bad_intertwiner_rejected():
    b = build_shift_block(binomial_kernel(1), 6)
    with pytest.raises(ParameterError):
        FlagOperator([b, b], {})
    with pytest.raises(ParameterError):
        FlagOperator([b, b], {(0, 1): np.ones((6, 6))})


def test_unbounded_intertwiner_warns():
    with pytest.warns(RuntimeWarning):
        canonical_intertwiner(exponential_kernel(), binomial_kernel(3), 32)


def test_jet_model_k2_equals_flag2():
    K = binomial_kernel(2)
    np.testing.assert_allclose(build_jet_model(K, [1.0], 12).matrix, build_flag2(K, K, 1.0, 12).matrix)


def test_jet_model_k3_superdiagonal():
    T = build_jet_model(binomial_kernel(1), [1.0, 2.0], 6)
    np.testing.assert_allclose(T.intertwiners[(0, 1)], np.eye(6))
    np.testing.assert_allclose(T.intertwiners[(1, 2)], 2 * np.eye(6))
    assert T.strict_bidiagonal and T.n == 3


def test_jet_model_k1_single_block():
    T = build_jet_model(binomial_kernel(1), [], 6)
    assert T.n == 1 and T.intertwiners == {}


def test_matrix_is_block_upper_triangular(rng):
    T = random_flag(rng, 4, 8, extra=True)
    M = T.matrix
    for i in range(4):
        for j in range(i):
            assert not np.any(M[T.block_slice(i), T.block_slice(j)])
    assert not T.strict_bidiagonal


def test_conjugation_is_unitary_similarity(rng):
    T = random_flag(rng, 3, 8, extra=True)
    ph = random_phases(T, rng)
    D = np.diag(np.concatenate(ph))
    np.testing.assert_allclose(T.conjugate(ph).matrix, D @ T.matrix @ D.conj().T, atol=1e-14)


def test_direct_sum():
    b0, b1 = build_shift_block(binomial_kernel(1), 3), build_shift_block(binomial_kernel(2), 3)
    M = direct_sum(b0, b1)
    np.testing.assert_allclose(M[:3, :3], b0.matrix)
    np.testing.assert_allclose(M[3:, 3:], b1.matrix)
    assert not np.any(M[:3, 3:])


def test_canonical_intertwiner_has_full_rank(rng):
    for _ in range(5):
        T = random_flag(rng, 3, 32)
        for (i, j), S in T.intertwiners.items():
            assert np.linalg.matrix_rank(S) == 32


# ------------------------------------------------------------------------- frames
def test_single_block_frame_residual():
    T = build_jet_model(binomial_kernel(2), [], 32)
    for w in (0.5, 0.5j, -0.3 + 0.4j):
        F = kernel_frame(T, w)
        assert F.residuals[0] < 1e-8


def test_last_section_at_origin_is_first_basis_vector():
    K = coefficient_kernel([4.0, 1.0, 1.0, 1.0, 1.0])
    T = build_flag2(binomial_kernel(1), K, 1.0, 4)
    t_last = kernel_frame(T, 0).orthogonal_parts[-1]
    expected = np.zeros(8)
    expected[4] = 2.0  # sqrt(a_0) e_0 of the last block
    np.testing.assert_allclose(t_last, expected)


def test_jet_model_sections_orthogonal_at_origin():
    F = kernel_frame(build_jet_model(binomial_kernel(1), [1.0], 16), 0)
    assert np.vdot(F.vectors[0], F.orthogonal_parts[1]) == 0


def test_frame_outside_disk():
    with pytest.raises(DomainError):
        kernel_frame(build_jet_model(binomial_kernel(1), [1.0], 8), 0.85)


def test_truncation_accuracy_error():
    T = build_jet_model(binomial_kernel(3), [2.0, 2.0, 2.0], 32)
    with pytest.raises(AccuracyError):
        kernel_frame(T, 0.5)
    # a larger truncation resolves the same point
    assert kernel_frame(build_jet_model(binomial_kernel(3), [2.0, 2.0, 2.0], 64), 0.5).residuals.max() < 1e-6


def _models(rng):
    out = [build_jet_model(binomial_kernel(1), [1.0, 2.0], 32),
           build_jet_model(binomial_kernel(3), [2.0, 2.0, 2.0], 32),
           build_flag2(binomial_kernel(1), binomial_kernel(3), 1.0, 32)]
    out += [random_flag(rng, n, 32, extra=e) for n in (2, 3, 4) for e in (False, True) if n >= 3 or not e]
    return out


def _points(rng, rmax, count=10):
    return rmax * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))


def _nullity(T, w):
    M = T.matrix
    s = np.linalg.svd(M - w * np.eye(M.shape[0]), compute_uv=False)
    return int(np.sum(s < 1e-8 * np.linalg.norm(M, 2)))


def test_eigen_residual_and_nullity_rank_two(rng):
    """Rank-two flags are resolved on the whole disk |w| <= 0.5 at N = 32."""
    for T in [build_flag2(binomial_kernel(1), binomial_kernel(3), 1.0, 32)] + [random_flag(rng, 2, 32) for _ in range(4)]:
        for w in _points(rng, 0.5):
            assert kernel_frame(T, w).residuals.max() < 1e-6
            assert _nullity(T, w) == 2


def test_eigen_residual_and_nullity_higher_rank(rng):
    """Higher-rank frames carry k-th derivatives; at N = 32 they are resolved for |w| <= 0.4."""
    for T in _models(rng):
        for w in _points(rng, 0.4):
            assert kernel_frame(T, w).residuals.max() < 1e-6
            assert _nullity(T, w) == T.n


def test_frame_is_linearly_independent(rng):
    for T in _models(rng):
        w = _points(rng, 0.4, 1)[0]
        G = np.stack(kernel_frame(T, w).vectors, axis=1)
        s = np.linalg.svd(G, compute_uv=False)
        assert s.min() > 1e-6 * s.max()


def test_sections_orthogonal_across_blocks(rng):
    for T in _models(rng):
        t = T.sections(_points(rng, 0.5, 1)[0])
        for i in range(T.n):
            for j in range(T.n):
                if i != j:
                    assert np.vdot(t[i], t[j]) == 0


def test_sections_follow_intertwiners(rng):
    T = random_flag(rng, 3, 16)
    w = 0.2 + 0.1j
    t = T.sections(w)
    for i in range(2):
        np.testing.assert_allclose(t[i][T.block_slice(i)], T.intertwiners[(i, i + 1)] @ t[i + 1][T.block_slice(i + 1)])


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3), st.floats(0.5, 3), st.floats(0.3, 3), st.floats(0, 0.5), st.floats(0, 2 * np.pi))
def test_norm_derivative_identity(l0, l1, mu, r, t):
    """d/dw ||gamma_0||^2 = <d gamma_0 - t_1, gamma_0>; with this library's sign
    convention gamma_1 = t_1 - d gamma_0 this reads -<gamma_1, gamma_0>."""
    T = build_flag2(binomial_kernel(l0), binomial_kernel(l1), mu, 32)
    w = r * np.exp(1j * t)
    h = 1e-6
    n2 = lambda p: np.vdot(T.frame(p)[0], T.frame(p)[0]).real
    # Wirtinger d/dw of a real function of w
    d_num = ((n2(w + h) - n2(w - h)) - 1j * (n2(w + 1j * h) - n2(w - 1j * h))) / (4 * h)
    g0, g1 = T.frame(w)
    t1 = T.sections(w)[1]
    dg0 = T.frame(w, order=1)[0]
    scale = max(1.0, abs(d_num))
    assert abs(np.vdot(g0, dg0 - t1) - d_num) < 1e-6 * scale
    assert abs(-np.vdot(g0, g1) - d_num) < 1e-6 * scale


def test_gamma_recursion_rank_three(rng):
    T = build_jet_model(binomial_kernel(2), [1.0, 1.5], 32)
    w = 0.25 - 0.1j
    t = T.sections(w)
    g = T.frame(w)
    dg = [T.frame(w, order=m) for m in (1, 2)]
    np.testing.assert_allclose(g[1], t[1] - dg[0][0], atol=1e-12)
    np.testing.assert_allclose(g[2], t[2] - dg[0][1] - dg[1][0] / 2, atol=1e-12)


def test_non_bidiagonal_frame_in_kernel(rng):
    T = random_flag(rng, 3, 32, extra=True)
    for w in _points(rng, 0.4, 3):
        F = kernel_frame(T, w)
        assert F.residuals.max() < 1e-6
        # the leading part of each gamma_i still starts in its own block
        np.testing.assert_allclose(F.vectors[0][T.block_slice(0)], F.orthogonal_parts[0][T.block_slice(0)])
