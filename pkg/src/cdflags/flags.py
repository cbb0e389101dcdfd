"""Truncated weighted-shift models of flag-structured operators.

Each diagonal block is the ``N x N`` compression of the adjoint of
multiplication by ``z`` on a diagonal-kernel space, written in the
orthonormal monomial basis: a backward weighted shift with superdiagonal
entries ``c_n``.  Its holomorphic eigen-section is

.. math:: t(w) = \\big(x_n w^n\\big)_{n < N}, \\qquad x_{n+1} = x_n / c_n,
          \\qquad x_0 = \\sqrt{a_0},

so ``T t(w) = w t(w)`` except for a residual in the last coordinate.  For an
unconjugated block ``x_n = sqrt(a_n)`` and ``||t(w)||^2`` is the truncated
``K(w, w)``.

A flag operator stacks blocks ``T_0 .. T_{n-1}`` on the diagonal with
intertwiners ``S_{i,j}`` (``i < j``) above it.  The flag frame is
``t_{n-1}`` = section of the last block, ``t_i = S_{i,i+1} t_{i+1}``, and the
eigen-frame ``gamma_k`` follows the recursion

.. math:: \\gamma_0 = t_0, \\qquad
          \\gamma_k = t_k - \\sum_{j=1}^{k} \\frac{1}{j!}\\,\\partial^j\\gamma_{k-j}.

All sections are stored as polynomial coefficient matrices (one column per
power of ``w``), so derivatives in ``w`` are exact.
"""

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import check_in_disk, check_int, check_positive
from .errors import AccuracyError, ParameterError
from .kernels import DiagonalKernel

DEFAULT_N = 32
INTERTWINING_RTOL = 1e-8
RATIO_WARNING = 1e6

__all__ = [
    "ShiftBlock",
    "FlagOperator",
    "SectionFrame",
    "build_shift_block",
    "build_flag2",
    "build_flag",
    "build_jet_model",
    "canonical_intertwiner",
    "direct_sum",
    "kernel_frame",
    "random_phases",
]


# ---------------------------------------------------------------------------
# polynomial-vector helpers: C has shape (dim, D), column m multiplies w**m

def poly_derivative(C, order=1):
    """Coefficient matrix of the ``order``-th ``w``-derivative."""
    D = C.shape[1]
    if order == 0:
        return C.copy()
    out = np.zeros_like(C)
    if order >= D:
        return out
    m = np.arange(order, D)
    scale = np.array([math.perm(int(k), order) for k in m], dtype=float)
    out[:, : D - order] = C[:, order:] * scale
    return out


def poly_eval(C, w, order=0):
    """Value of the polynomial vector (or of its derivative) at ``w``."""
    if order:
        C = poly_derivative(C, order)
    powers = np.power(complex(w), np.arange(C.shape[1]))
    return C @ powers


def _pad(C, D):
    if C.shape[1] >= D:
        return C
    out = np.zeros((C.shape[0], D), dtype=C.dtype)
    out[:, : C.shape[1]] = C
    return out


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShiftBlock:
    """Backward weighted shift ``T e_{n+1} = c_n e_n`` on ``C^N``.

    Parameters
    ----------
    weights : array_like of complex, length ``N - 1``
        Superdiagonal entries ``c_0 .. c_{N-2}``; all non-zero.  Complex
        weights arise from diagonal-unitary conjugation.
    kernel : DiagonalKernel
        Kernel whose coefficient ratios give ``|c_n|^2 = a_n / a_{n+1}``.
    """

    weights: np.ndarray
    kernel: DiagonalKernel

    def __post_init__(self):
        c = np.array(self.weights, dtype=complex).ravel()
        if c.size < 1:
            raise ParameterError("a shift block needs dimension N >= 2")
        if np.any(c == 0) or not np.all(np.isfinite(c)):
            raise ParameterError("shift weights must be finite and non-zero")
        c.setflags(write=False)
        object.__setattr__(self, "weights", c)

    @property
    def dim(self):
        return self.weights.size + 1

    @cached_property
    def matrix(self):
        M = np.diag(self.weights, 1)
        M.setflags(write=False)
        return M

    @cached_property
    def section_coefficients(self):
        """Vector ``x`` with ``t(w)_n = x_n w^n``."""
        x = np.empty(self.dim, dtype=complex)
        x[0] = np.sqrt(self.kernel.coeffs[0])
        for n, c in enumerate(self.weights):
            x[n + 1] = x[n] / c
        x.setflags(write=False)
        return x

    def section(self, w):
        """Holomorphic eigen-section ``t(w)`` (``T t = w t`` up to the last row)."""
        return self.section_coefficients * np.power(complex(w), np.arange(self.dim))


@dataclass(frozen=True, eq=False)
class SectionFrame:
    """Holomorphic frames of a flag operator at one point.

    Attributes
    ----------
    point : complex
    vectors : list of ndarray
        ``gamma_0(w) .. gamma_{n-1}(w)``, a frame of ``ker(T - w)``.
    orthogonal_parts : list of ndarray
        ``t_0(w) .. t_{n-1}(w)``; ``t_i`` lives in block ``i``.
    residuals : ndarray
        ``||(T - w) gamma_i|| / ||gamma_i||``.
    """

    point: complex
    vectors: list
    orthogonal_parts: list
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class FlagOperator:
    """Block upper-triangular model ``T = [T_i; S_{i,j}]``.

    Parameters
    ----------
    blocks : sequence of ShiftBlock
        Diagonal blocks ``T_0 .. T_{n-1}``, all of the same size ``N``.
    intertwiners : dict
        ``{(i, j): S_ij}`` for ``i < j``; every ``S_{i,i+1}`` must be present,
        non-zero, and satisfy ``T_i S = S T_{i+1}`` outside the last row.
    """

    blocks: tuple
    intertwiners: dict

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks or not all(isinstance(b, ShiftBlock) for b in blocks):
            raise ParameterError("blocks must be a non-empty sequence of ShiftBlock")
        N = blocks[0].dim
        if any(b.dim != N for b in blocks):
            raise ParameterError("all diagonal blocks must have the same dimension")
        n = len(blocks)
        S = {}
        for key, value in dict(self.intertwiners).items():
            i, j = (int(k) for k in key)
            if not 0 <= i < j < n:
                raise ParameterError(f"intertwiner index {key} must satisfy 0 <= i < j < {n}")
            M = np.array(value, dtype=complex)
            if M.shape != (N, N):
                raise ParameterError(f"S_{i},{j} must be {N}x{N}, got {M.shape}")
            M.setflags(write=False)
            if np.any(M != 0):
                S[(i, j)] = M
        for i in range(n - 1):
            if (i, i + 1) not in S:
                raise ParameterError(f"S_{i},{i + 1} must be a non-zero intertwiner")
            A, B = blocks[i].matrix, blocks[i + 1].matrix
            M = S[(i, i + 1)]
            R = (A @ M - M @ B)[:-1]
            scale = np.linalg.norm(M, 2) * max(np.linalg.norm(A, 2), np.linalg.norm(B, 2), 1.0)
            if np.linalg.norm(R, 2) > INTERTWINING_RTOL * scale:
                raise ParameterError(f"S_{i},{i + 1} does not intertwine T_{i} and T_{i + 1}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "intertwiners", S)

    # -- shape -------------------------------------------------------------
    @property
    def n(self):
        """Number of diagonal blocks (rank of the eigen-bundle)."""
        return len(self.blocks)

    @property
    def N(self):
        """Size of each diagonal block."""
        return self.blocks[0].dim

    @property
    def dim(self):
        return self.n * self.N

    @property
    def strict_bidiagonal(self):
        """True when only the ``S_{i,i+1}`` are non-zero."""
        return all(j == i + 1 for i, j in self.intertwiners)

    @property
    def radius(self):
        """Accuracy radius shared by all block kernels."""
        return min(b.kernel.radius for b in self.blocks)

    def block_slice(self, i):
        return slice(i * self.N, (i + 1) * self.N)

    @cached_property
    def matrix(self):
        """Assembled ``nN x nN`` matrix."""
        T = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            T[self.block_slice(i), self.block_slice(i)] = b.matrix
        for (i, j), M in self.intertwiners.items():
            T[self.block_slice(i), self.block_slice(j)] = M
        T.setflags(write=False)
        return T

    # -- transformations ---------------------------------------------------
    def conjugate(self, phases):
        """Unitarily conjugate by a block-diagonal diagonal unitary.

        Parameters
        ----------
        phases : sequence of array_like
            One length-``N`` vector of unimodular numbers per block; the
            result is ``D T D*`` with ``D = diag(phases)``.
        """
        if len(phases) != self.n:
            raise ParameterError(f"need {self.n} phase vectors")
        d = [np.asarray(p, dtype=complex).ravel() for p in phases]
        if any(p.size != self.N for p in d) or any(np.any(np.abs(np.abs(p) - 1) > 1e-12) for p in d):
            raise ParameterError(f"phases must be unimodular vectors of length {self.N}")
        blocks = [ShiftBlock(p[:-1] * b.weights * np.conj(p[1:]), b.kernel) for p, b in zip(d, self.blocks)]
        S = {(i, j): d[i][:, None] * M * np.conj(d[j])[None, :] for (i, j), M in self.intertwiners.items()}
        return FlagOperator(blocks, S)

    # -- section series ----------------------------------------------------
    @cached_property
    def section_series(self):
        """Coefficient matrices of the flag sections ``t_0 .. t_{n-1}``."""
        n, N = self.n, self.N
        t = [None] * n
        C = np.zeros((self.dim, N), dtype=complex)
        sl = self.block_slice(n - 1)
        C[sl, :] = np.diag(self.blocks[-1].section_coefficients)
        t[-1] = C
        for i in range(n - 2, -1, -1):
            C = np.zeros((self.dim, N), dtype=complex)
            C[self.block_slice(i), :] = self.intertwiners[(i, i + 1)] @ t[i + 1][self.block_slice(i + 1), :]
            t[i] = C
        for C in t:
            C.setflags(write=False)
        return tuple(t)

    @cached_property
    def frame_series(self):
        """Coefficient matrices of the eigen-frame ``gamma_0 .. gamma_{n-1}``."""
        t = self.section_series
        g = []
        for k in range(self.n):
            G = t[k].astype(complex)
            for j in range(1, k + 1):
                H = poly_derivative(g[k - j], j)
                D = max(G.shape[1], H.shape[1])
                G = _pad(G, D) - _pad(H, D) / math.factorial(j)
            if not self.strict_bidiagonal:
                G = self._kernel_correction(G)
            G.setflags(write=False)
            g.append(G)
        return tuple(g)

    def _right_inverse(self, y):
        """Solve ``T b = y`` by block back substitution.

        Each block's zeroth coordinate is set to 0, and the last coordinate
        of each block's right-hand side is unmatched (the truncation row).
        """
        b = np.zeros_like(y)
        for i in range(self.n - 1, -1, -1):
            z = y[self.block_slice(i)].copy()
            for (p, j), M in self.intertwiners.items():
                if p == i:
                    z -= M @ b[self.block_slice(j)]  # j > i: already solved
            bi = np.zeros_like(z)
            bi[1:] = z[:-1] / self.blocks[i].weights
            b[self.block_slice(i)] = bi
        return b

    def _kernel_correction(self, G):
        """Project a polynomial section onto ``ker(T - w)`` modulo truncation.

        Solves ``(T - w) beta(w) = (T - w) G(w)`` coefficientwise,
        ``b_m = R(r_m + b_{m-1})`` with ``R`` the block right inverse, and
        returns ``G - beta``.  The right inverse only fills coordinates above
        each block's zeroth, so the leading part of ``G`` is preserved.
        """
        T = self.matrix
        D = G.shape[1]
        r = np.zeros((self.dim, D + 1), dtype=complex)
        r[:, :D] = T @ G
        r[:, 1:] -= G
        cols = []
        prev = np.zeros(self.dim, dtype=complex)
        max_steps = D + 1 + self.dim + 1
        for m in range(max_steps):
            rhs = prev + (r[:, m] if m < r.shape[1] else 0)
            bm = self._right_inverse(rhs)
            cols.append(bm)
            prev = bm
            if m >= r.shape[1] and not np.any(bm):
                break
        beta = np.stack(cols, axis=1)
        out = _pad(G, beta.shape[1]) - beta
        # drop trailing zero columns
        nz = np.flatnonzero(np.any(out != 0, axis=0))
        return out[:, : (nz[-1] + 1 if nz.size else 1)]

    def sections(self, w, order=0):
        """``t_i(w)`` (or its ``order``-th derivative) for every ``i``."""
        return [poly_eval(C, w, order) for C in self.section_series]

    def frame(self, w, order=0):
        """``gamma_i(w)`` (or its ``order``-th derivative) for every ``i``."""
        return [poly_eval(C, w, order) for C in self.frame_series]


# ---------------------------------------------------------------------------
# constructors

def build_shift_block(K, N=DEFAULT_N):
    """Backward weighted shift model of ``M_z^*`` on the kernel space of ``K``.

    Parameters
    ----------
    K : DiagonalKernel
    N : int
        Block size, ``2 <= N <= K.truncation_degree``.

    Returns
    -------
    ShiftBlock
        Superdiagonal entries ``sqrt(a_n / a_{n+1})``.
    """
    N = check_int(N, "N", 2)
    if N > K.truncation_degree:
        raise ParameterError(f"N = {N} exceeds the kernel truncation degree {K.truncation_degree}")
    a = K.coeffs
    return ShiftBlock(np.sqrt(a[: N - 1] / a[1:N]), K)


def canonical_intertwiner(K0, K1, N=DEFAULT_N):
    """Diagonal intertwiner ``S`` with ``T_0 S = S T_1`` and ``S t_1 = t_0``.

    The entries are ``sqrt(a0_n / a1_n)``.  A warning is issued when their
    spread exceeds ``1e6``: the truncation then hides a possibly unbounded
    operator on the full space.
    """
    N = check_int(N, "N", 2)
    s = np.sqrt(K0.coeffs[:N] / K1.coeffs[:N])
    spread = s.max() / s.min()
    if spread > RATIO_WARNING:
        warnings.warn(f"canonical intertwiner entries spread by {spread:.3g}; "
                      "it may be unbounded on the untruncated space", RuntimeWarning, stacklevel=2)
    return np.diag(s).astype(complex)


def build_flag(kernels, mu, N=DEFAULT_N, extra=None):
    """Flag operator with canonical superdiagonal intertwiners.

    Parameters
    ----------
    kernels : sequence of DiagonalKernel
        Block kernels ``K_0 .. K_{n-1}``.
    mu : sequence of float
        Positive multipliers, ``S_{i,i+1} = mu_i * S_canonical(K_i, K_{i+1})``.
    N : int
    extra : dict, optional
        Additional intertwiners ``{(i, j): S_ij}`` with ``j >= i + 2``.
    """
    kernels = list(kernels)
    mu = [check_positive(m, "mu") for m in np.atleast_1d(mu)]
    if len(mu) != len(kernels) - 1:
        raise ParameterError(f"need {len(kernels) - 1} multipliers for {len(kernels)} blocks, got {len(mu)}")
    blocks = [build_shift_block(K, N) for K in kernels]
    S = {(i, i + 1): m * canonical_intertwiner(kernels[i], kernels[i + 1], N) for i, m in enumerate(mu)}
    for key, M in (extra or {}).items():
        i, j = key
        if j < i + 2:
            raise ParameterError("extra intertwiners must sit at least two blocks above the diagonal")
        S[(i, j)] = M
    return FlagOperator(blocks, S)


def build_flag2(K0, K1, mu, N=DEFAULT_N):
    """Rank-two flag ``[[T_0, mu S], [0, T_1]]`` with the canonical ``S``."""
    return build_flag([K0, K1], [mu], N)


def build_jet_model(K, mu_super, N=DEFAULT_N):
    """Bidiagonal model with equal blocks and ``S_{l-1,l} = mu_{l+1,l} I``.

    Parameters
    ----------
    K : DiagonalKernel
    mu_super : sequence of float
        Positive superdiagonal multipliers ``mu_{2,1} .. mu_{k,k-1}``; an
        empty sequence gives a single block.
    """
    mu_super = [check_positive(m, "mu") for m in np.atleast_1d(np.asarray(mu_super, dtype=float))]
    block = build_shift_block(K, N)
    I = np.eye(block.dim, dtype=complex)
    S = {(l, l + 1): m * I for l, m in enumerate(mu_super)}
    return FlagOperator([block] * (len(mu_super) + 1), S)


def direct_sum(*blocks):
    """Block-diagonal matrix of shift blocks (no intertwiners)."""
    mats = [b.matrix if isinstance(b, ShiftBlock) else np.asarray(b) for b in blocks]
    dim = sum(m.shape[0] for m in mats)
    T = np.zeros((dim, dim), dtype=complex)
    o = 0
    for m in mats:
        T[o:o + m.shape[0], o:o + m.shape[0]] = m
        o += m.shape[0]
    return T


def random_phases(T, rng):
    """Random unimodular phase vectors suited to :meth:`FlagOperator.conjugate`."""
    return [np.exp(2j * np.pi * rng.random(T.N)) for _ in range(T.n)]


def kernel_frame(T, w, tol=1e-6):
    """Holomorphic frames of ``ker(T - w)`` at one point.

    Parameters
    ----------
    T : FlagOperator
    w : complex
        ``|w| <= T.radius``.
    tol : float
        Maximal admissible relative eigen-residual.

    Returns
    -------
    SectionFrame

    Raises
    ------
    AccuracyError
        If some ``||(T - w) gamma_i|| / ||gamma_i||`` exceeds ``tol``;
        increase ``N`` or move ``w`` toward the origin.
    """
    w = check_in_disk(w, T.radius)
    gam = T.frame(w)
    ts = T.sections(w)
    A = T.matrix
    res = np.array([np.linalg.norm(A @ g - w * g) / np.linalg.norm(g) for g in gam])
    if np.any(res > tol):
        raise AccuracyError(f"truncation residual {res.max():.3g} exceeds {tol:g} at w = {w}; increase N")
    return SectionFrame(point=w, vectors=gam, orthogonal_parts=ts, residuals=res)
