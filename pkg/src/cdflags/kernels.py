"""Diagonal reproducing kernels on discs centred at the origin.

A diagonal kernel is a power series in ``z * conj(w)``,

.. math:: K(z, w) = \\sum_{n \\ge 0} a_n (z \\bar w)^n, \\qquad a_n > 0,

and every quantity needed downstream (values, mixed derivatives, the
``2 x 2`` flag kernel) is computed exactly from the stored coefficients.
Truncated families carry a geometric bound on the discarded tail so the
evaluation error on the accuracy disk is known.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ._validation import as_point, check_in_disk, check_int, check_positive
from .errors import ParameterError, TruncationError

DEFAULT_DEGREE = 64
DEFAULT_RADIUS = 0.8
GUARD_TERMS = 16

__all__ = [
    "DiagonalKernel",
    "KernelJetMatrix",
    "binomial_kernel",
    "exponential_kernel",
    "coefficient_kernel",
    "eval_jet",
    "kernel_gamma",
    "falling_factorials",
]


@dataclass(frozen=True, eq=False)
class DiagonalKernel:
    """Positive diagonal kernel ``K(z, w) = sum_n a_n (z conj(w))^n``.

    Parameters
    ----------
    coeffs : array_like of float
        Strictly positive coefficients ``a_0 .. a_M``.
    radius : float, optional
        Radius of the disk on which evaluation accuracy is guaranteed.
    exact : bool, optional
        If True the coefficient list *is* the kernel (a polynomial kernel);
        no tail exists and no guard terms are required.  If False the list
        truncates an infinite series whose ratio ``a_{n+1}/a_n`` is bounded
        by ``tail_ratio`` beyond ``M``.
    tail_ratio : float, optional
        Bound on the coefficient ratio beyond the truncation, used for the
        geometric tail estimate.  Ignored when ``exact``.
    """

    coeffs: np.ndarray
    radius: float = DEFAULT_RADIUS
    exact: bool = True
    tail_ratio: float = 1.0
    name: str = field(default="coeffs", compare=False)

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=float).ravel()
        if a.size == 0:
            raise ParameterError("a kernel needs at least one coefficient")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ParameterError("kernel coefficients must be finite and strictly positive")
        r = float(self.radius)
        if not 0 < r < 1:
            raise ParameterError(f"radius must lie in (0, 1), got {r}")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "radius", r)
        q = float(self.tail_ratio)
        if not self.exact and q * r**2 >= 1:
            raise ParameterError("tail ratio too large for a convergent tail bound on the accuracy disk")
        object.__setattr__(self, "tail_ratio", q)

    @property
    def truncation_degree(self):
        """Index ``M`` of the last stored coefficient."""
        return self.coeffs.size - 1

    @property
    def tail_bound(self):
        """Upper bound on ``sum_{n>M} a_n |z w|^n`` for ``|z|, |w| <= radius``.

        Computed by dominating the tail with a geometric series of ratio
        ``tail_ratio * radius**2``.
        """
        if self.exact:
            return 0.0
        M = self.truncation_degree
        x = self.tail_ratio * self.radius**2
        return float(self.coeffs[-1] * self.radius ** (2 * M) * x / (1 - x))

    def __call__(self, z, w):
        """Evaluate ``K(z, w)`` (scalar points)."""
        z = check_in_disk(z, self.radius, "z")
        w = check_in_disk(w, self.radius, "w")
        x = z * np.conj(w)
        return complex(np.polynomial.polynomial.polyval(x, self.coeffs))

    def diagonal(self, w):
        """Real value ``K(w, w) = ||K(., w)||^2``."""
        return self(w, w).real

    def scaled(self, c):
        """Return the kernel ``c * K`` for a positive constant ``c``."""
        c = check_positive(c, "c")
        return DiagonalKernel(self.coeffs * c, self.radius, self.exact, self.tail_ratio, self.name)

    def with_degree(self, degree):
        """Return the kernel truncated to ``degree`` (only shortening is possible)."""
        degree = check_int(degree, "degree", 0)
        if degree > self.truncation_degree:
            raise ParameterError("cannot extend a stored coefficient list; rebuild the kernel instead")
        return DiagonalKernel(self.coeffs[: degree + 1], self.radius, self.exact, self.tail_ratio, self.name)

    def __repr__(self):
        return f"DiagonalKernel({self.name}, M={self.truncation_degree}, radius={self.radius})"


@dataclass(frozen=True, eq=False)
class KernelJetMatrix:
    """Mixed derivatives ``d_z^i d_{conj w}^j K(z, w)`` for ``i, j < order``."""

    order: int
    entries: np.ndarray
    base_points: tuple


def binomial_kernel(lam, degree=DEFAULT_DEGREE, radius=DEFAULT_RADIUS):
    """Truncation of ``(1 - z conj(w))^(-lam)``.

    The coefficients are the generalized binomials
    ``a_n = Gamma(lam + n) / (Gamma(lam) n!)``.  ``lam = 1`` is the Szego
    kernel, ``lam = 2`` the Bergman kernel.

    Parameters
    ----------
    lam : float
        Positive exponent.
    degree : int
        Truncation degree ``M``.
    radius : float
        Accuracy radius.

    Returns
    -------
    DiagonalKernel
    """
    lam = check_positive(lam, "lambda")
    degree = check_int(degree, "degree", 1)
    n = np.arange(degree + 1)
    a = np.exp(gammaln(lam + n) - gammaln(lam) - gammaln(n + 1))
    # a_{n+1}/a_n = (lam + n)/(n + 1) is monotone in n and tends to 1
    q = max((lam + degree) / (degree + 1), 1.0)
    return DiagonalKernel(a, radius, exact=False, tail_ratio=q, name=f"binomial(lambda={lam:g})")


def exponential_kernel(degree=DEFAULT_DEGREE, radius=DEFAULT_RADIUS):
    """Truncation of ``exp(z conj(w))`` (coefficients ``1/n!``)."""
    degree = check_int(degree, "degree", 1)
    n = np.arange(degree + 1)
    a = np.exp(-gammaln(n + 1))
    return DiagonalKernel(a, radius, exact=False, tail_ratio=1.0 / (degree + 1), name="exponential")


def coefficient_kernel(values, radius=DEFAULT_RADIUS):
    """Polynomial kernel with the given coefficients, taken as exact."""
    return DiagonalKernel(np.asarray(values, dtype=float), radius, exact=True, name="coeffs")


def falling_factorials(M, r):
    """Matrix ``F[n, i] = n! / (n - i)!`` for ``n <= M``, ``i < r`` (zero if ``i > n``)."""
    n = np.arange(M + 1, dtype=float)[:, None]
    F = np.ones((M + 1, r))
    for i in range(1, r):
        F[:, i] = F[:, i - 1] * np.maximum(n[:, 0] - (i - 1), 0.0)
    return F


def _power_table(x, M, r):
    """``P[n, i] = x^(n - i)`` for ``n >= i`` and 0 otherwise."""
    n = np.arange(M + 1)[:, None] - np.arange(r)[None, :]
    P = np.zeros((M + 1, r), dtype=complex)
    mask = n >= 0
    P[mask] = np.power(complex(x), n[mask])
    return P


def eval_jet(K, z, w, r):
    """Jet matrix of mixed derivatives of a diagonal kernel.

    Entry ``(i, j)`` is ``d_z^i d_{conj w}^j K(z, w)``, evaluated exactly
    from the coefficient series:

    .. math:: \\sum_{n \\ge \\max(i,j)} a_n \\frac{n!}{(n-i)!}\\frac{n!}{(n-j)!}
              z^{n-i} \\bar w^{n-j}.

    Parameters
    ----------
    K : DiagonalKernel
    z, w : complex
        Points in the accuracy disk.
    r : int
        Order; the result is ``r x r``.

    Returns
    -------
    KernelJetMatrix

    Raises
    ------
    DomainError
        If a point lies outside ``K.radius``.
    TruncationError
        If a truncated kernel has fewer than ``r + 16`` stored terms.
    """
    r = check_int(r, "r", 1)
    z = check_in_disk(z, K.radius, "z")
    w = check_in_disk(w, K.radius, "w")
    M = K.truncation_degree
    if not K.exact and M < r + GUARD_TERMS:
        raise TruncationError(
            f"jet order {r} needs truncation degree >= {r + GUARD_TERMS}, kernel has {M}")
    F = falling_factorials(M, r)
    U = F * _power_table(z, M, r)
    V = F * _power_table(np.conj(w), M, r)
    E = U.T @ (K.coeffs[:, None] * V)
    return KernelJetMatrix(order=r, entries=E, base_points=(z, w))


def kernel_gamma(K0, K1):
    """Matrix kernel of a rank-two flag bundle.

    Returns the evaluator

    .. math:: K_\\Gamma(z, w) = \\begin{pmatrix} K_0 & \\bar\\partial_w K_0 \\\\
              \\partial_z K_0 & \\partial_z \\bar\\partial_w K_0 + K_1 \\end{pmatrix},

    i.e. the order-2 jet of ``K0`` plus ``diag(0, K1)``.

    Raises
    ------
    ParameterError
        If the kernels have different accuracy radii.
    """
    if not np.isclose(K0.radius, K1.radius, rtol=0, atol=1e-15):
        raise ParameterError(f"kernels must share an accuracy radius ({K0.radius} vs {K1.radius})")

    def evaluate(z, w):
        z = as_point(z, "z")
        w = as_point(w, "w")
        G = eval_jet(K0, z, w, 2).entries.copy()
        G[1, 1] += K1(z, w)
        return G

    return evaluate
