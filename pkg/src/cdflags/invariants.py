"""Unitary invariants of flag models and the decisions built on them.

For a strictly bidiagonal flag the curvature of the last block together
with the section-norm ratios ``||t_{i-1}(w)|| / ||t_i(w)||`` is a complete
set of unitary invariants; for two blocks the ratio may be replaced by the
second fundamental form ``theta_12``.  Functions of ``w`` are compared on a
finite grid, so every verdict is a statement about the sampled values.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._validation import as_grid, as_point, check_in_disk, check_positive
from .errors import CompletenessError, DomainError, ParameterError
from .flags import FlagOperator, ShiftBlock
from .geometry import curvature_line, ddbar_log_norm, theta12_from_metric
from .kernels import DiagonalKernel

DEFAULT_TOL = 1e-6
SYLVESTER_RCOND = 1e-10

__all__ = [
    "InvariantReport",
    "EquivalenceVerdict",
    "HomogeneityDiagnosis",
    "SylvesterVerdict",
    "block_kernel",
    "invariant_report",
    "decide_equivalence",
    "is_homogeneous_line",
    "is_homogeneous_flag2",
    "mobius_homogeneity_probe",
    "sylvester_range_test",
]


def block_kernel(block):
    """Polynomial kernel realized by a (truncated) shift block.

    The coefficients ``|x_n|^2`` of the eigen-section depend only on the
    moduli of the weights, so this kernel is a unitary invariant of the
    block matrix itself.
    """
    x = block.section_coefficients
    return DiagonalKernel(np.abs(x) ** 2, block.kernel.radius, exact=True, name="block")


@dataclass(frozen=True, eq=False)
class InvariantReport:
    """Grid samples of the unitary invariants of a flag model.

    Attributes
    ----------
    grid : ndarray of complex
    curvature_last, curvature_first : ndarray of float
        Curvature of the last and the first diagonal block.
    ratios : ndarray, shape (n - 1, len(grid))
        Row ``i - 1`` holds ``||t_{i-1}(w)|| / ||t_i(w)||``.
    extra_ratios : dict
        ``{(k, l): ||S_{k,l} t_l(w)|| / ||t_0(w)||}`` for the intertwiners
        with ``l >= k + 2``.
    theta12 : ndarray or None
        Second fundamental form samples (two blocks only).
    """

    grid: np.ndarray
    curvature_last: np.ndarray
    curvature_first: np.ndarray
    ratios: np.ndarray
    extra_ratios: dict = field(default_factory=dict)
    theta12: np.ndarray = None

    def columns(self):
        """CSV header: re, im, kappa, ratio_1.., theta12 (if present)."""
        cols = ["re", "im", "kappa"] + [f"ratio_{i + 1}" for i in range(self.ratios.shape[0])]
        if self.theta12 is not None:
            cols.append("theta12")
        return cols

    def rows(self):
        """One row of floats per grid point, matching :meth:`columns`."""
        out = []
        for p, w in enumerate(self.grid):
            row = [w.real, w.imag, self.curvature_last[p]] + list(self.ratios[:, p])
            if self.theta12 is not None:
                row.append(self.theta12[p])
            out.append(row)
        return out


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Outcome of comparing two invariant reports.

    ``equivalent`` holds iff every gap is below ``tolerance_used``.
    ``necessary_only`` marks verdicts where agreement is only a necessary
    condition (non-bidiagonal models with more than two blocks).
    """

    equivalent: bool
    max_curvature_gap: float
    max_ratio_gap: float
    tolerance_used: float
    invariant_set: str = "ratio"
    necessary_only: bool = False


def _check_grid(T, grid):
    g = as_grid(grid)
    for w in g:
        check_in_disk(w, T.radius)
    return g


def invariant_report(T, grid=None):
    """Sample the unitary invariants of ``T`` on a grid.

    Parameters
    ----------
    T : FlagOperator
    grid : array_like of complex, optional
        Defaults to 5 radii x 8 angles in ``|w| <= 0.5``.

    Returns
    -------
    InvariantReport

    Notes
    -----
    Ratios use the flag sections ``t_i``, which are exact polynomial
    sections of the truncated model; the curvature uses the kernel realized
    by the block matrix (see :func:`block_kernel`).
    """
    g = _check_grid(T, grid)
    K_last = block_kernel(T.blocks[-1])
    K_first = block_kernel(T.blocks[0])
    curv_last = np.array([curvature_line(K_last, w).value for w in g])
    curv_first = np.array([curvature_line(K_first, w).value for w in g])
    n = T.n
    ratios = np.empty((n - 1, g.size))
    extra = {key: np.empty(g.size) for key in T.intertwiners if key[1] >= key[0] + 2}
    theta = np.empty(g.size) if n == 2 else None
    for p, w in enumerate(g):
        t = T.sections(w)
        norms = [np.linalg.norm(v) for v in t]
        for i in range(1, n):
            ratios[i - 1, p] = norms[i - 1] / norms[i]
        for (k, l) in extra:
            v = T.intertwiners[(k, l)] @ t[l][T.block_slice(l)]
            extra[(k, l)][p] = np.linalg.norm(v) / norms[0]
        if theta is not None:
            dt0 = T.sections(w, order=1)[0]
            theta[p] = theta12_from_metric(norms[0] ** 2, ddbar_log_norm(t[0], dt0), norms[1] ** 2)
    return InvariantReport(grid=g, curvature_last=curv_last, curvature_first=curv_first,
                           ratios=ratios, extra_ratios=extra, theta12=theta)


def _max_gap(a, b):
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def decide_equivalence(A, B, grid=None, tol=DEFAULT_TOL, invariants="ratio", necessary_only=False):
    """Decide unitary equivalence of two flag models from their invariants.

    Parameters
    ----------
    A, B : FlagOperator
    grid : array_like of complex, optional
    tol : float
        Absolute tolerance on every pointwise gap.
    invariants : {"ratio", "theta"}
        ``"ratio"`` compares last-block curvature and all section ratios;
        ``"theta"`` (two blocks only) compares last-block curvature and the
        second fundamental form.
    necessary_only : bool
        Must be set to compare non-bidiagonal models with more than two
        blocks, for which agreement of the invariants (including the extra
        ratios) is only known to be necessary.

    Returns
    -------
    EquivalenceVerdict

    Raises
    ------
    CompletenessError
        For non-bidiagonal input with ``n > 2`` unless ``necessary_only``.
    """
    tol = check_positive(tol, "tol")
    if invariants not in ("ratio", "theta"):
        raise ParameterError(f"unknown invariant set {invariants!r}")
    bidiagonal = A.strict_bidiagonal and B.strict_bidiagonal
    partial = A.n > 2 and not bidiagonal
    if partial and not necessary_only:
        raise CompletenessError("completeness not established for non-bidiagonal flags with more than "
                                "two blocks; pass necessary_only=True for a necessary-conditions check")
    g = as_grid(grid)
    if A.n != B.n:
        return EquivalenceVerdict(False, np.inf, np.inf, tol, invariants, partial)
    if invariants == "theta" and A.n != 2:
        raise ParameterError("the second fundamental form invariant set needs exactly two blocks")
    ra, rb = invariant_report(A, g), invariant_report(B, g)
    curv_gap = _max_gap(ra.curvature_last, rb.curvature_last)
    if invariants == "theta":
        ratio_gap = _max_gap(ra.theta12, rb.theta12)
    else:
        ratio_gap = _max_gap(ra.ratios, rb.ratios)
        if partial:
            keys = set(ra.extra_ratios) | set(rb.extra_ratios)
            zero = np.zeros(g.size)
            for key in keys:
                ratio_gap = max(ratio_gap, _max_gap(ra.extra_ratios.get(key, zero), rb.extra_ratios.get(key, zero)))
    equivalent = bool(curv_gap < tol and ratio_gap < tol)
    return EquivalenceVerdict(equivalent, curv_gap, ratio_gap, tol, invariants, partial)


# ---------------------------------------------------------------------------
# homogeneity

def is_homogeneous_line(K, grid=None, rtol=DEFAULT_TOL):
    """Detect the homogeneous curvature profile ``-lambda (1 - |w|^2)^(-2)``.

    Parameters
    ----------
    K : DiagonalKernel
    grid : array_like of complex, optional
    rtol : float
        Relative tolerance of the pointwise match.

    Returns
    -------
    float or None
        ``lambda = -curvature(0)`` if it is positive and the profile matches
        on the whole grid, otherwise ``None``.
    """
    g = as_grid(grid)
    lam = -curvature_line(K, 0).value
    if not lam > rtol:
        return None
    for w in g:
        target = lam / (1 - abs(w) ** 2) ** 2
        if abs(curvature_line(K, w).value + target) > rtol * target:
            return None
    return float(lam)


@dataclass(frozen=True)
class HomogeneityDiagnosis:
    """Outcome of the rank-two homogeneity test.

    ``failed_condition`` is ``None`` on success, otherwise one of
    ``"i"`` (a block is not homogeneous), ``"ii"`` (the curvature parameters
    do not differ by 2) or ``"iii"`` (``||S t_1|| / ||t_0||`` is not constant).
    """

    homogeneous: bool
    failed_condition: str = None
    lambdas: tuple = (None, None)
    alpha: float = None
    detail: str = ""


def is_homogeneous_flag2(T, grid=None, rtol=DEFAULT_TOL):
    """Test the three conditions characterizing homogeneous rank-two flags.

    (i) both diagonal blocks are homogeneous with parameters ``lambda_0``,
    ``lambda_1``; (ii) ``lambda_1 = lambda_0 + 2``, the curvature identity
    ``K_{T_1} = K_{T_0} + K_{B^*}`` for the backward shift ``B^*`` of
    parameter 2; (iii) ``S t_1 = alpha t_0`` with a constant ``alpha > 0``,
    where ``t_0`` is the block-0 section normalized by its own kernel.

    Returns
    -------
    HomogeneityDiagnosis
    """
    if T.n != 2:
        raise ParameterError("homogeneity conditions are implemented for two blocks")
    g = _check_grid(T, grid)
    lam0 = is_homogeneous_line(block_kernel(T.blocks[0]), g, rtol)
    lam1 = is_homogeneous_line(block_kernel(T.blocks[1]), g, rtol)
    lams = (lam0, lam1)
    if lam0 is None or lam1 is None:
        which = "T_0" if lam0 is None else "T_1"
        return HomogeneityDiagnosis(False, "i", lams, None, f"{which} does not have homogeneous curvature")
    if abs(lam1 - lam0 - 2) > rtol * max(1.0, lam1):
        return HomogeneityDiagnosis(False, "ii", lams, None, f"lambda_1 - lambda_0 = {lam1 - lam0:.6g}, expected 2")
    vals = []
    for w in g:
        St1 = T.sections(w)[0][T.block_slice(0)]
        own = T.blocks[0].section(w)
        vals.append(np.linalg.norm(St1) / np.linalg.norm(own))
    vals = np.array(vals)
    alpha = float(np.mean(vals))
    spread = float(np.max(np.abs(vals - alpha)) / alpha)
    if spread > rtol:
        return HomogeneityDiagnosis(False, "iii", lams, None, f"||S t_1|| / ||t_0|| varies by {spread:.3g}")
    return HomogeneityDiagnosis(True, None, lams, alpha, "all conditions hold")


def mobius_homogeneity_probe(T, u, grid=None):
    """Maximal relative violation of the Moebius transformation law.

    With ``phi_u(w) = (w - u) / (1 - conj(u) w)`` and
    ``R(w) = ||S t_1(w)||^2 / ||t_1(w)||^2``, a homogeneous rank-two flag
    satisfies ``R(phi_u^{-1}(w)) = |(phi_u^{-1})'(w)|^2 R(w)``.

    Parameters
    ----------
    T : FlagOperator
        Two blocks.
    u : complex
        ``|u| < 1``.
    grid : array_like of complex, optional

    Returns
    -------
    float
        ``max |lhs - rhs| / |rhs|`` over the grid.

    Raises
    ------
    DomainError
        If a transported point ``phi_u^{-1}(w)`` leaves the accuracy disk.
    """
    if T.n != 2:
        raise ParameterError("the Moebius probe is implemented for two blocks")
    u = as_point(u, "u")
    if not abs(u) < 1:
        raise ParameterError("u must lie in the open unit disk")
    g = _check_grid(T, grid)

    def R(w):
        t0, t1 = T.sections(w)
        return np.vdot(t0, t0).real / np.vdot(t1, t1).real

    worst = 0.0
    for w in g:
        z = (w + u) / (1 + np.conj(u) * w)
        if abs(z) > T.radius + 1e-12:
            raise DomainError(f"transported point {z:.4g} leaves the accuracy disk of radius {T.radius}")
        dinv = (1 - abs(u) ** 2) / (1 + np.conj(u) * w) ** 2
        rhs = abs(dinv) ** 2 * R(w)
        worst = max(worst, abs(R(z) - rhs) / abs(rhs))
    return float(worst)


# ---------------------------------------------------------------------------
# strong irreducibility

@dataclass(frozen=True)
class SylvesterVerdict:
    """Least-squares membership of ``S`` in the range of ``X -> T0 X - X T1``.

    ``residual`` is ``min_X ||T0 X - X T1 - S||_F / ||S||_F``.  A residual
    above the tolerance means ``S`` is outside the range, which certifies
    strong irreducibility of ``[[T0, S], [0, T1]]`` *at truncation N*.
    ``invertible_intertwiner`` records the independent certificate
    available when ``S`` is an invertible intertwiner: the flag is then
    similar to ``[[T0, I], [0, T0]]``, which is strongly irreducible.
    """

    in_range: bool
    residual: float
    tolerance: float
    strongly_irreducible: bool
    invertible_intertwiner: bool
    label: str


def _as_matrix(B):
    return B.matrix if isinstance(B, ShiftBlock) else np.asarray(B, dtype=complex)


def sylvester_range_test(T0, T1, S, tol=1e-8):
    """Test whether ``S`` lies in the range of the Sylvester map.

    Parameters
    ----------
    T0, T1 : ShiftBlock or ndarray
    S : ndarray
    tol : float
        Threshold on the relative least-squares residual.

    Returns
    -------
    SylvesterVerdict
    """
    A, B = _as_matrix(T0), _as_matrix(T1)
    S = np.asarray(S, dtype=complex)
    p, q = A.shape[0], B.shape[0]
    if A.shape != (p, p) or B.shape != (q, q) or S.shape != (p, q):
        raise ParameterError("incompatible dimensions for the Sylvester map")
    snorm = np.linalg.norm(S)
    if snorm == 0:
        raise ParameterError("S must be non-zero")
    # column-major vec: vec(A X) = (I kron A) vec X, vec(X B) = (B^T kron I) vec X
    L = np.kron(np.eye(q), A) - np.kron(B.T, np.eye(p))
    s = S.reshape(-1, order="F")
    # the map is rank deficient by construction; drop its numerical null space
    x, *_ = sla.lstsq(L, s, cond=SYLVESTER_RCOND, lapack_driver="gelsd")
    residual = float(np.linalg.norm(L @ x - s) / snorm)
    in_range = residual <= tol
    invertible = False
    if p == q and np.linalg.cond(S) < 1e12:
        # similarity certificate: an invertible S that intertwines (outside
        # the truncation row) makes the flag similar to T0 (+) T1 shifted by I
        R = (A @ S - S @ B)[:-1]
        invertible = np.linalg.norm(R) <= 1e-8 * snorm * max(np.linalg.norm(A), 1.0)
    return SylvesterVerdict(
        in_range=in_range,
        residual=residual,
        tolerance=float(tol),
        strongly_irreducible=not in_range,
        invertible_intertwiner=bool(invertible),
        label=f"at truncation N={p}",
    )
