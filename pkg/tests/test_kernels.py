"""Kernel coefficients, jet evaluation and the rank-two matrix kernel."""

import numpy as np
import pytest
import mpmath
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import binom

from cdflags.errors import DomainError, ParameterError, TruncationError
from cdflags.kernels import (DiagonalKernel, binomial_kernel, coefficient_kernel, eval_jet,
                             exponential_kernel, falling_factorials, kernel_gamma)


def test_binomial_coefficients_szego():
    np.testing.assert_allclose(binomial_kernel(1, 3).coeffs, [1, 1, 1, 1])


def test_binomial_coefficients_bergman():
    np.testing.assert_allclose(binomial_kernel(2, 2).coeffs, [1, 2, 3], rtol=1e-14)


def test_binomial_coefficients_half():
    np.testing.assert_allclose(binomial_kernel(0.5, 2).coeffs, [1, 0.5, 0.375], rtol=1e-14)


@pytest.mark.parametrize("lam", [0.3, 1.7, 4.0])
def test_binomial_coefficients_match_generalized_binomial(lam):
    n = np.arange(30)
    np.testing.assert_allclose(binomial_kernel(lam, 29).coeffs, binom(lam + n - 1, n), rtol=1e-12)


@pytest.mark.parametrize("bad", [0, -1.0, np.nan])
def test_binomial_rejects_nonpositive_lambda(bad):
    with pytest.raises(ParameterError):
        binomial_kernel(bad)


def test_coefficients_must_be_positive():
    with pytest.raises(ParameterError):
        coefficient_kernel([1.0, 0.0, 2.0])
    with pytest.raises(ParameterError):
        coefficient_kernel([])


def test_radius_validated():
    with pytest.raises(ParameterError):
        DiagonalKernel(np.ones(3), radius=1.0)


def test_tail_bound_small_for_defaults():
    K = binomial_kernel(2)
    assert 0 < K.tail_bound < 1e-3
    assert coefficient_kernel([1, 2]).tail_bound == 0.0


def test_tail_bound_dominates_actual_tail():
    K = binomial_kernel(1.5, 48)
    full = binomial_kernel(1.5, 600).coeffs
    r2 = K.radius ** 2
    actual = np.sum(full[49:] * r2 ** np.arange(49, 601))
    assert actual <= K.tail_bound


def test_jet_szego_origin():
    J = eval_jet(binomial_kernel(1), 0, 0, 2)
    np.testing.assert_allclose(J.entries, np.eye(2), atol=1e-15)
    assert J.order == 2 and J.base_points == (0, 0)


def test_jet_order_one_is_constant_term(rng):
    K = coefficient_kernel(rng.uniform(0.5, 2, 5))
    assert eval_jet(K, 0, 0, 1).entries[0, 0] == pytest.approx(K.coeffs[0])


def test_jet_direct_summation():
    K = coefficient_kernel([1, 2, 3])
    assert eval_jet(K, 0.5, 0.5, 1).entries[0, 0].real == pytest.approx(1.6875, rel=1e-15)


def test_jet_domain_error():
    with pytest.raises(DomainError):
        eval_jet(binomial_kernel(1), 0.9, 0, 1)


def test_jet_truncation_guard():
    K = binomial_kernel(1, degree=20)
    eval_jet(K, 0, 0, 4)
    with pytest.raises(TruncationError):
        eval_jet(K, 0, 0, 5)
    # exact polynomial kernels need no guard terms
    eval_jet(coefficient_kernel([1, 1]), 0.1, 0.2, 6)


def test_falling_factorials():
    F = falling_factorials(4, 3)
    np.testing.assert_array_equal(F[:, 1], [0, 1, 2, 3, 4])
    np.testing.assert_array_equal(F[:, 2], [0, 0, 2, 6, 12])


def _fd_mixed(K, z, w, i, j):
    """Mixed derivative by central finite differences in extended precision.

    ``K(z, w) = f(z, conj w)`` with ``f`` holomorphic in both slots, so the
    Wirtinger derivatives are ordinary partial derivatives of ``f``.
    """
    coeffs = [mpmath.mpf(float(a)) for a in K.coeffs]

    def f(x, y):
        return mpmath.polyval(coeffs[::-1], x * y)

    with mpmath.workdps(40):
        return complex(mpmath.diff(f, (mpmath.mpc(z), mpmath.mpc(np.conj(w))), (i, j)))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.6), st.floats(0, 2 * np.pi), st.floats(0.05, 0.6), st.floats(0, 2 * np.pi),
       st.integers(0, 3), st.integers(0, 3))
def test_jet_matches_finite_difference_oracle(rz, tz, rw, tw, i, j):
    K = binomial_kernel(1.5)
    z, w = rz * np.exp(1j * tz), rw * np.exp(1j * tw)
    exact = eval_jet(K, z, w, 4).entries[i, j]
    approx = _fd_mixed(K, z, w, i, j)
    assert abs(exact - approx) <= 1e-6 * max(1.0, abs(exact))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.floats(0, 0.8), st.floats(0, 2 * np.pi), st.integers(1, 5))
def test_jet_diagonal_is_psd(lam, r, t, order):
    w = r * np.exp(1j * t)
    E = eval_jet(binomial_kernel(lam), w, w, order).entries
    np.testing.assert_allclose(E, E.conj().T, rtol=1e-12, atol=1e-12 * np.abs(E).max())
    ev = np.linalg.eigvalsh((E + E.conj().T) / 2)
    assert ev.min() >= -1e-9 * ev.max()


def test_kernel_gamma_szego():
    G = kernel_gamma(binomial_kernel(1), binomial_kernel(1))(0, 0)
    np.testing.assert_allclose(G, [[1, 0], [0, 2]], atol=1e-15)


def test_kernel_gamma_bergman_pair():
    G = kernel_gamma(binomial_kernel(2), binomial_kernel(4))(0, 0)
    np.testing.assert_allclose(G, [[1, 0], [0, 3]], atol=1e-14)


def test_kernel_gamma_vanishing_second_kernel_is_pure_jet():
    K0 = binomial_kernel(1.5)
    tiny = coefficient_kernel([1e-300])
    z, w = 0.3 + 0.1j, -0.2 + 0.4j
    np.testing.assert_allclose(kernel_gamma(K0, tiny)(z, w), eval_jet(K0, z, w, 2).entries, rtol=1e-14)


def test_kernel_gamma_radius_mismatch():
    with pytest.raises(ParameterError):
        kernel_gamma(binomial_kernel(1, radius=0.8), binomial_kernel(1, radius=0.7))


@pytest.mark.parametrize("w", [0, 0.3j, 0.5 - 0.5j, 0.79])
def test_kernel_gamma_psd_on_diagonal(w):
    G = kernel_gamma(binomial_kernel(1), binomial_kernel(3))(w, w)
    assert np.linalg.eigvalsh((G + G.conj().T) / 2).min() > 0


def test_exp_kernel_coefficients():
    np.testing.assert_allclose(exponential_kernel(4).coeffs, [1, 1, 1 / 2, 1 / 6, 1 / 24], rtol=1e-14)


def test_scaled_and_with_degree():
    K = binomial_kernel(2, 10)
    np.testing.assert_allclose(K.scaled(3).coeffs, 3 * K.coeffs)
    assert K.with_degree(4).truncation_degree == 4
    with pytest.raises(ParameterError):
        K.with_degree(11)
