"""Hermitian geometry of line bundles and rank-two flags.

Curvature of a line bundle with holomorphic frame ``s`` is

.. math:: \\mathcal K(w) = -\\partial\\bar\\partial \\log \\|s(w)\\|^2,

and for the flag sub-bundle spanned by ``gamma_0`` inside a rank-two bundle
the second fundamental form has the ``d bar z`` coefficient

.. math:: \\theta_{12} = -\\frac{\\partial\\bar\\partial \\log h}
          {\\left(\\|t_1\\|^2 / h + \\partial\\bar\\partial \\log h\\right)^{1/2}},
          \\qquad h = \\|\\gamma_0\\|^2.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from ._validation import as_point, check_int
from .errors import DegenerateMetricError, GeometricDegeneracyError, ParameterError
from .kernels import eval_jet

DEGENERATE_METRIC = 1e-12

__all__ = [
    "CurvatureSample",
    "MetricSample",
    "SecondFundamentalFormSample",
    "curvature_line",
    "ddbar_log_norm",
    "metric_sample",
    "second_fundamental_form",
    "theta12_from_metric",
    "frame_change_matrix",
]


@dataclass(frozen=True)
class CurvatureSample:
    point: complex
    value: float


@dataclass(frozen=True)
class MetricSample:
    """Metric data of a rank-two flag at one point."""

    point: complex
    h: float
    t1_norm_sq: float


@dataclass(frozen=True)
class SecondFundamentalFormSample:
    point: complex
    coefficient: float


def _ddbar_log(K, dK, dbarK, ddbarK):
    """``d dbar log K`` from the value and derivatives of a positive function."""
    return (K * ddbarK - dK * dbarK) / K**2


def curvature_line(K, w):
    """Curvature of the line bundle defined by a diagonal kernel.

    Parameters
    ----------
    K : DiagonalKernel
    w : complex
        Point with ``|w| <= K.radius``.

    Returns
    -------
    CurvatureSample
        ``-(K K_{z wbar} - K_z K_{wbar}) / K^2`` at ``z = w``.

    Raises
    ------
    DegenerateMetricError
        If ``K(w, w) < 1e-12``.

    Examples
    --------
    >>> from cdflags.kernels import binomial_kernel
    >>> round(curvature_line(binomial_kernel(2), 0).value, 12)
    -2.0
    """
    w = as_point(w)
    J = eval_jet(K, w, w, 2).entries
    k0 = J[0, 0].real
    if k0 < DEGENERATE_METRIC:
        raise DegenerateMetricError(f"K(w, w) = {k0:.3g} is below {DEGENERATE_METRIC}")
    value = -_ddbar_log(k0, J[1, 0], J[0, 1], J[1, 1]).real
    return CurvatureSample(point=w, value=float(value) + 0.0)  # no signed zero


def ddbar_log_norm(s, ds):
    """``d dbar log ||s||^2`` for a holomorphic vector section.

    Parameters
    ----------
    s, ds : array_like
        The section and its holomorphic derivative at one point.
    """
    s = np.asarray(s)
    ds = np.asarray(ds)
    nrm = np.vdot(s, s).real
    if nrm < DEGENERATE_METRIC:
        raise DegenerateMetricError(f"section norm^2 = {nrm:.3g} is below {DEGENERATE_METRIC}")
    cross = np.vdot(s, ds)
    return float((nrm * np.vdot(ds, ds).real - abs(cross) ** 2) / nrm**2)


def metric_sample(K0, K1, w):
    """Evaluate ``h = K0(w, w)`` and ``||t_1||^2 = K1(w, w)``."""
    w = as_point(w)
    return MetricSample(point=w, h=K0.diagonal(w), t1_norm_sq=K1.diagonal(w))


def theta12_from_metric(h, ddbar_log_h, t1_norm_sq):
    """Second fundamental form coefficient from metric data.

    Raises
    ------
    GeometricDegeneracyError
        If the radicand ``t1_norm_sq / h + ddbar_log_h`` is not positive.
    """
    if h < DEGENERATE_METRIC:
        raise DegenerateMetricError(f"h = {h:.3g} is below {DEGENERATE_METRIC}")
    radicand = t1_norm_sq / h + ddbar_log_h
    if not radicand > 0:
        raise GeometricDegeneracyError(f"non-positive radicand {radicand:.3g} in the second fundamental form")
    return float(-ddbar_log_h / np.sqrt(radicand))


def second_fundamental_form(K0, K1, w):
    """Second fundamental form of the flag ``E_0 in E`` for the kernel pair.

    Uses ``h = K0(w, w)`` (norm of ``gamma_0``) and ``||t_1||^2 = K1(w, w)``.

    Returns
    -------
    SecondFundamentalFormSample
        The real ``d bar z`` coefficient, with the leading minus sign.
    """
    w = as_point(w)
    J = eval_jet(K0, w, w, 2).entries
    h = J[0, 0].real
    if h < DEGENERATE_METRIC:
        raise DegenerateMetricError(f"K0(w, w) = {h:.3g} is below {DEGENERATE_METRIC}")
    L = _ddbar_log(h, J[1, 0], J[0, 1], J[1, 1]).real
    return SecondFundamentalFormSample(point=w, coefficient=theta12_from_metric(h, L, K1.diagonal(w)))


def frame_change_matrix(phi_jet, k):
    """Matrix of a holomorphic frame change on a rank-``k`` jet bundle.

    Entry ``(i, j)`` for ``i <= j`` (0-indexed) is ``C(j, i) phi^{(j-i)}``;
    entries below the diagonal vanish.  The map ``phi -> frame_change_matrix``
    is multiplicative (Leibniz rule).

    Parameters
    ----------
    phi_jet : sequence of complex
        ``phi(w), phi'(w), ..., phi^{(k-1)}(w)``; extra entries are ignored.
    k : int

    Returns
    -------
    ndarray, shape (k, k)
    """
    k = check_int(k, "k", 1)
    jet = np.asarray(phi_jet, dtype=complex).ravel()
    if jet.size < k:
        raise ParameterError(f"need {k} jet entries, got {jet.size}")
    P = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(i, k):
            P[i, j] = comb(j, i, exact=True) * jet[j - i]
    return P
