"""Unitary invariants, equivalence decisions, homogeneity and the Sylvester test."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from cdflags._validation import disk_grid
from cdflags.errors import CompletenessError, DomainError, ParameterError
from cdflags.flags import (build_flag, build_flag2, build_jet_model, build_shift_block, random_phases)
from cdflags.geometry import curvature_line
from cdflags.harness import random_flag
from cdflags.invariants import (block_kernel, decide_equivalence, invariant_report, is_homogeneous_flag2,
                                is_homogeneous_line, mobius_homogeneity_probe, sylvester_range_test)
from cdflags.kernels import binomial_kernel, coefficient_kernel, exponential_kernel

K1, K2, K3 = binomial_kernel(1), binomial_kernel(2), binomial_kernel(3)


def test_block_kernel_recovers_coefficients():
    b = build_shift_block(binomial_kernel(1.7), 20)
    np.testing.assert_allclose(block_kernel(b).coeffs, binomial_kernel(1.7).coeffs[:20], rtol=1e-12)


def test_jet_model_ratios_are_multipliers():
    r = invariant_report(build_jet_model(K2, [0.7, 1.9], 32))
    np.testing.assert_allclose(r.ratios[0], 0.7, rtol=1e-12)
    np.testing.assert_allclose(r.ratios[1], 1.9, rtol=1e-12)


@pytest.mark.parametrize("lam,alpha", [(1, 1.0), (2, 0.6), (0.5, 2.5)])
def test_homogeneous_flag_ratio_profile(lam, alpha):
    g = disk_grid()
    r = invariant_report(build_flag2(binomial_kernel(lam), binomial_kernel(lam + 2), alpha, 32), g)
    np.testing.assert_allclose(r.ratios[0], alpha * (1 - np.abs(g) ** 2), rtol=1e-8)


def test_rank_one_report_has_only_curvature():
    r = invariant_report(build_jet_model(K3, [], 16))
    assert r.ratios.shape == (0, 40) and r.theta12 is None and r.extra_ratios == {}
    assert r.columns() == ["re", "im", "kappa"]
    assert len(r.rows()) == 40 and len(r.rows()[0]) == 3


def test_report_columns_rank_three():
    r = invariant_report(build_jet_model(K1, [1.0, 2.0], 16), [0.1, 0.2j])
    assert r.columns() == ["re", "im", "kappa", "ratio_1", "ratio_2"]


def test_extra_ratios_for_nonbidiagonal(rng):
    T = random_flag(rng, 3, 16, extra=True)
    r = invariant_report(T, [0.1, 0.3j])
    assert set(r.extra_ratios) == {(0, 2)}
    assert np.all(r.extra_ratios[(0, 2)] > 0)


def test_grid_outside_disk_rejected():
    with pytest.raises(DomainError):
        invariant_report(build_jet_model(K1, [1.0], 16), [0.9])


def test_equivalence_identical():
    T = build_flag2(K1, K3, 1.0, 32)
    v = decide_equivalence(T, T)
    assert v.equivalent and v.max_curvature_gap == 0 and v.max_ratio_gap == 0


def test_different_multipliers_not_equivalent():
    v = decide_equivalence(build_flag2(K2, K2, 1.0, 32), build_flag2(K2, K2, 2.0, 32), grid=[0])
    assert not v.equivalent
    assert v.max_ratio_gap == pytest.approx(1.0, rel=1e-12)


def test_phase_conjugate_equivalent(rng):
    T = build_flag2(K1, K3, 1.0, 32)
    v = decide_equivalence(T, T.conjugate(random_phases(T, rng)))
    assert v.equivalent and v.max_ratio_gap < 1e-12


def test_non_bidiagonal_needs_explicit_flag(rng):
    A = random_flag(rng, 3, 16, extra=True)
    with pytest.raises(CompletenessError):
        decide_equivalence(A, A)
    v = decide_equivalence(A, A.conjugate(random_phases(A, rng)), necessary_only=True)
    assert v.equivalent and v.necessary_only


def test_extra_intertwiner_changes_necessary_invariants(rng):
    A = random_flag(rng, 3, 16, extra=True)
    S = dict(A.intertwiners)
    S[(0, 2)] = 2 * S[(0, 2)]
    from cdflags.flags import FlagOperator
    B = FlagOperator(A.blocks, S)
    assert not decide_equivalence(A, B, necessary_only=True).equivalent


def test_different_block_counts():
    v = decide_equivalence(build_jet_model(K1, [1.0], 16), build_jet_model(K1, [1.0, 1.0], 16))
    assert not v.equivalent


def test_theta_invariants_need_two_blocks():
    T = build_jet_model(K1, [1.0, 1.0], 16)
    with pytest.raises(ParameterError):
        decide_equivalence(T, T, invariants="theta")


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 3), st.floats(0.5, 3), st.floats(0.5, 2), st.floats(-0.4, 0.4), st.integers(0, 2**32 - 1))
def test_ratio_and_theta_verdicts_agree(l0, l1, mu, dmu, seed):
    A = build_flag2(binomial_kernel(l0), binomial_kernel(l1), mu, 32)
    rng = np.random.default_rng(seed)
    for B in (A.conjugate(random_phases(A, rng)), build_flag2(binomial_kernel(l0), binomial_kernel(l1), mu + dmu, 32)):
        assert decide_equivalence(A, B).equivalent == decide_equivalence(A, B, invariants="theta").equivalent


# --------------------------------------------------------------------------- homogeneity
def test_line_homogeneity_detects_lambda():
    assert is_homogeneous_line(binomial_kernel(2.5)) == pytest.approx(2.5, rel=1e-9)


def test_line_homogeneity_rejects_exp_and_flat():
    assert is_homogeneous_line(exponential_kernel()) is None
    assert is_homogeneous_line(coefficient_kernel([1.0])) is None


def test_curvature_additivity():
    for lam in (0.5, 1.0, 2.0, 3.3):
        for w in disk_grid():
            lhs = curvature_line(binomial_kernel(lam + 2), w).value
            rhs = curvature_line(binomial_kernel(lam), w).value + curvature_line(K2, w).value
            assert abs(lhs - rhs) < 1e-8


def test_flag_homogeneity_accepts():
    d = is_homogeneous_flag2(build_flag2(K1, K3, 1.0, 32))
    assert d.homogeneous and d.failed_condition is None
    assert d.alpha == pytest.approx(1.0, rel=1e-9)
    assert d.lambdas[0] == pytest.approx(1) and d.lambdas[1] == pytest.approx(3)


def test_flag_homogeneity_alpha_is_multiplier():
    d = is_homogeneous_flag2(build_flag2(K2, binomial_kernel(4), 1.7, 32))
    assert d.homogeneous and d.alpha == pytest.approx(1.7, rel=1e-9)


def test_flag_homogeneity_gap_one():
    d = is_homogeneous_flag2(build_flag2(K1, K2, 1.0, 32))
    assert not d.homogeneous and d.failed_condition == "ii"


def test_flag_homogeneity_exp_kernel():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        T = build_flag2(exponential_kernel(), K3, 1.0, 32)
    d = is_homogeneous_flag2(T)
    assert not d.homogeneous and d.failed_condition == "i"


def test_mobius_probe_homogeneous():
    T = build_flag2(K1, K3, 1.0, 32)
    assert mobius_homogeneity_probe(T, 0.3) < 1e-5
    assert mobius_homogeneity_probe(T, 0.0) < 1e-13


def test_mobius_probe_non_homogeneous():
    assert mobius_homogeneity_probe(build_flag2(K1, K2, 1.0, 32), 0.3) > 0.1


def test_mobius_probe_domain():
    with pytest.raises(DomainError):
        mobius_homogeneity_probe(build_flag2(K1, K3, 1.0, 32), 0.6)


# -------------------------------------------------------------------------- Sylvester
@pytest.mark.parametrize("N", [8, 16, 32])
def test_identity_outside_sylvester_range(N):
    b = build_shift_block(K1, N)
    v = sylvester_range_test(b, b, np.eye(N))
    assert v.residual >= 1 / np.sqrt(N)
    assert v.strongly_irreducible and not v.in_range
    assert v.invertible_intertwiner
    assert v.label == f"at truncation N={N}"


def test_constructed_member_in_range(rng):
    b = build_shift_block(K2, 16)
    A = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    v = sylvester_range_test(b, b, b.matrix @ A - A @ b.matrix)
    assert v.residual < 1e-10 and v.in_range and not v.strongly_irreducible


def test_invertible_diagonal_intertwiner_certificate():
    T = build_flag2(K1, K3, 1.0, 16)
    v = sylvester_range_test(T.blocks[0], T.blocks[1], T.intertwiners[(0, 1)])
    assert v.invertible_intertwiner and v.strongly_irreducible


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_sylvester_residual_unitarily_invariant(seed, member):
    rng = np.random.default_rng(seed)
    N = 10
    T0, T1 = build_shift_block(K1, N).matrix, build_shift_block(K3, N).matrix
    if member:
        X = rng.normal(size=(N, N))
        S = T0 @ X - X @ T1
    else:
        S = np.diag(rng.uniform(0.5, 2, N))
    U, V = unitary_group.rvs(N, random_state=rng), unitary_group.rvs(N, random_state=rng)
    a = sylvester_range_test(T0, T1, S).residual
    b = sylvester_range_test(U @ T0 @ U.conj().T, V @ T1 @ V.conj().T, U @ S @ V.conj().T).residual
    assert abs(a - b) < 1e-8


def test_sylvester_dimension_check():
    with pytest.raises(ParameterError):
        sylvester_range_test(np.zeros((3, 3)), np.zeros((4, 4)), np.ones((4, 4)))
