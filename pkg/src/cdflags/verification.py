"""Numerical checks of the structural properties of truncated flag models.

The tools here are brute-force linear algebra on the assembled matrix:

* the commutant ``{T}'`` as the null space of ``X -> TX - XT``;
* an idempotent search in the ``*``-commutant ``{T, T*}'`` (whose
  self-adjoint idempotents are exactly the reducing projections);
* a unitary alignment (Procrustes seed plus Riemannian refinement) with
  a certified lower bound on the best achievable residual;
* the exact invertible intertwiner obtained from matched section frames.

Every verdict is a statement about the truncated matrices.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._validation import check_int, check_positive
from .errors import ParameterError, ResourceError
from .flags import FlagOperator

MAX_COMMUTANT_DIM = 64
COMMUTANT_RCOND = 1e-10

__all__ = [
    "CommutantBasis",
    "IntertwinerSolution",
    "IrreducibilityVerdict",
    "commutant_basis",
    "star_commutant_basis",
    "irreducibility_check",
    "rigidity_probe",
    "invertible_intertwiner",
    "block_profile",
    "unitary_lower_bound",
]


def _matrix(T):
    if isinstance(T, FlagOperator):
        return T.matrix
    M = np.asarray(T, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError("operator must be a square matrix or a FlagOperator")
    return M


def _block_size(T, block_size):
    if block_size is not None:
        return check_int(block_size, "block_size", 1)
    if isinstance(T, FlagOperator):
        return T.N
    return None


def block_profile(X, block_size):
    """Relative spectral norms ``||X_ij|| / ||X||`` of the ``block_size`` blocks."""
    X = np.asarray(X)
    n = X.shape[0] // block_size
    total = np.linalg.norm(X, 2)
    P = np.zeros((n, n))
    if total == 0:
        return P
    for i in range(n):
        for j in range(n):
            blk = X[i * block_size:(i + 1) * block_size, j * block_size:(j + 1) * block_size]
            P[i, j] = np.linalg.norm(blk, 2) / total
    return P


def _commutator_map(M):
    """Matrix of ``vec(X) -> vec(MX - XM)`` in column-major ``vec``."""
    d = M.shape[0]
    I = np.eye(d)
    return np.kron(I, M) - np.kron(M.T, I)


def _null_space(L, rcond):
    _, s, Vh = sla.svd(L, full_matrices=True, lapack_driver="gesdd")
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rcond * smax))
    return Vh[rank:].conj().T


def _check_cap(d, max_dim):
    if d > max_dim:
        raise ResourceError(f"model dimension {d} exceeds the commutant cap {max_dim} "
                            f"(the vectorized map is {d * d} x {d * d})")


@dataclass(frozen=True, eq=False)
class CommutantBasis:
    """Orthonormal (Frobenius) basis of the numerical commutant.

    Attributes
    ----------
    basis : list of ndarray
    dimension : int
    max_residual : float
        ``max ||TX - XT|| / (||T|| ||X||)`` over the basis.
    """

    basis: list
    dimension: int
    max_residual: float

    def profiles(self, block_size):
        return [block_profile(X, block_size) for X in self.basis]


def commutant_basis(T, tol=COMMUTANT_RCOND, max_dim=MAX_COMMUTANT_DIM):
    """Basis of ``{T}' = {X : TX = XT}`` for the truncated model.

    Parameters
    ----------
    T : FlagOperator or ndarray
    tol : float
        Singular values below ``tol * sigma_max`` count as zero.
    max_dim : int
        Cap on the model dimension ``d``; the SVD acts on a ``d^2 x d^2``
        matrix.

    Returns
    -------
    CommutantBasis

    Raises
    ------
    ResourceError
        If the model dimension exceeds ``max_dim``.
    """
    M = _matrix(T)
    d = M.shape[0]
    _check_cap(d, max_dim)
    Z = _null_space(_commutator_map(M), tol)
    basis = [Z[:, c].reshape(d, d, order="F") for c in range(Z.shape[1])]
    nT = max(np.linalg.norm(M, 2), 1e-300)
    res = max((np.linalg.norm(M @ X - X @ M, 2) / (nT * np.linalg.norm(X, 2)) for X in basis), default=0.0)
    return CommutantBasis(basis=basis, dimension=len(basis), max_residual=float(res))


def star_commutant_basis(T, tol=COMMUTANT_RCOND, max_dim=MAX_COMMUTANT_DIM):
    """Orthonormal basis (columns of vec) of ``{T, T*}'``, a ``*``-algebra."""
    M = _matrix(T)
    d = M.shape[0]
    _check_cap(d, max_dim)
    L = np.vstack([_commutator_map(M), _commutator_map(M.conj().T)])
    return _null_space(L, tol)


@dataclass(frozen=True, eq=False)
class IrreducibilityVerdict:
    """Outcome of the reducing-projection search.

    ``status`` is ``"irreducible"``, ``"reducible"`` or ``"inconclusive"``;
    for a reducible model ``projection`` is a non-trivial orthogonal
    projection commuting with ``T`` and ``commutation_residual`` its
    relative commutator norm.
    """

    status: str
    projection: np.ndarray = None
    commutation_residual: float = None
    star_commutant_dimension: int = 0
    seeds_converged: int = 0
    seeds: int = 0

    @property
    def irreducible(self):
        return self.status == "irreducible"


def irreducibility_check(T, tol=1e-8, seeds=50, max_iter=100, rng=None, max_dim=MAX_COMMUTANT_DIM):
    """Search for a non-trivial reducing projection of ``T``.

    Random self-adjoint elements of ``{T, T*}'`` are affinely rescaled to
    spectrum ``[0, 1]`` and driven to idempotents by
    ``P <- 3P^2 - 2P^3``, re-projected onto the algebra each step.

    Parameters
    ----------
    T : FlagOperator or ndarray
    tol : float
        Idempotency tolerance and triviality threshold.
    seeds : int
        Number of random seeds.
    max_iter : int
        Iteration cap per seed.
    rng : numpy.random.Generator or int, optional

    Returns
    -------
    IrreducibilityVerdict
        ``"irreducible"`` only if every seed converged to ``0`` or ``I``;
        any seed that fails to converge without a non-trivial projection
        being found makes the verdict ``"inconclusive"``.
    """
    rng = np.random.default_rng(rng)
    M = _matrix(T)
    d = M.shape[0]
    B = star_commutant_basis(M, max_dim=max_dim)
    dimB = B.shape[1]
    I = np.eye(d)
    nT = max(np.linalg.norm(M, 2), 1e-300)

    def project(P):
        v = B @ (B.conj().T @ P.reshape(-1, order="F"))
        P = v.reshape(d, d, order="F")
        return (P + P.conj().T) / 2

    converged = 0
    for _ in range(seeds):
        c = rng.normal(size=dimB) + 1j * rng.normal(size=dimB)
        X = (B @ c).reshape(d, d, order="F")
        H = (X + X.conj().T) / 2
        ev = np.linalg.eigvalsh(H)
        spread = ev[-1] - ev[0]
        if spread <= tol * max(abs(ev[-1]), abs(ev[0]), 1.0):
            converged += 1  # a scalar: both spectral projections are trivial
            continue
        P = (H - ev[0] * I) / spread
        ok = False
        for _ in range(max_iter):
            P2 = P @ P
            P = project(3 * P2 - 2 * P2 @ P)
            if np.linalg.norm(P @ P - P, 2) < tol:
                ok = True
                break
        if not ok:
            continue
        converged += 1
        if min(np.linalg.norm(P, 2), np.linalg.norm(I - P, 2)) > 0.5:
            # round to the exact spectral projection
            w, V = np.linalg.eigh(P)
            Vk = V[:, w > 0.5]
            P = Vk @ Vk.conj().T
            if P[0, 0].real < 0.5:
                P = I - P
            res = np.linalg.norm(M @ P - P @ M, 2) / nT
            return IrreducibilityVerdict("reducible", P, float(res), dimB, converged, seeds)
    status = "irreducible" if converged == seeds else "inconclusive"
    return IrreducibilityVerdict(status, None, None, dimB, converged, seeds)


# ---------------------------------------------------------------------------
# unitary alignment

@dataclass(frozen=True, eq=False)
class IntertwinerSolution:
    """An (approximate) intertwiner ``X`` with ``X A ~ B X``.

    Attributes
    ----------
    X : ndarray
    residual : float
        ``||XA - BX|| / (||X|| max(||A||, ||B||))`` (spectral norms).
    block_profile : ndarray
        ``||X_ij|| / ||X||`` per block, or ``None`` without a block size.
    unitary : bool
        Whether ``X`` is unitary to ``1e-10``.
    lower_bound : float
        Certified lower bound on the relative residual of *any* unitary
        intertwiner (0 when nothing can be certified).
    status : str
        ``"aligned"`` (residual below tolerance), ``"obstructed"`` (the
        lower bound exceeds the tolerance: no unitary intertwiner exists),
        or ``"inconclusive"``.
    """

    X: np.ndarray
    residual: float
    block_profile: np.ndarray
    unitary: bool
    lower_bound: float = 0.0
    status: str = "aligned"

    def off_diagonal_norm(self):
        """Largest off-diagonal entry of the block profile."""
        P = self.block_profile
        return float(np.max(P - np.diag(np.diag(P)))) if P is not None and P.size > 1 else 0.0

    def subdiagonal_norm(self):
        """Largest strictly-lower entry of the block profile."""
        P = self.block_profile
        return float(np.max(np.tril(P, -1))) if P is not None and P.size > 1 else 0.0


def _polar(M):
    U, _, Vh = np.linalg.svd(M)
    return U @ Vh


def _relres(X, A, B):
    scale = np.linalg.norm(X, 2) * max(np.linalg.norm(A, 2), np.linalg.norm(B, 2), 1e-300)
    return float(np.linalg.norm(X @ A - B @ X, 2) / scale)


def unitary_lower_bound(A, B):
    """Certified lower bound on ``min_U ||UA - BU|| / max(||A||, ||B||)``.

    Uses perturbation bounds for ``E = U A U* - B``: singular values
    (Mirsky), eigenvalues of the Hermitian and anti-Hermitian parts (Weyl),
    and eigenvalues of the self-commutator ``A*A - AA*`` divided by
    ``8 max(||A||, ||B||)``.
    """
    A = _matrix(A)
    B = _matrix(B)
    m = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2), 1e-300)
    bounds = [np.max(np.abs(np.linalg.svd(A, compute_uv=False) - np.linalg.svd(B, compute_uv=False)))]
    for f in (lambda Z: (Z + Z.conj().T) / 2, lambda Z: (Z - Z.conj().T) / 2j):
        bounds.append(np.max(np.abs(np.linalg.eigvalsh(f(A)) - np.linalg.eigvalsh(f(B)))))
    cA = A.conj().T @ A - A @ A.conj().T
    cB = B.conj().T @ B - B @ B.conj().T
    bounds.append(np.max(np.abs(np.linalg.eigvalsh(cA) - np.linalg.eigvalsh(cB))) / (8 * m))
    return float(max(bounds) / m)


def _frame_coefficients(T):
    """Columns: Taylor coefficients of every flag section, scaled per column."""
    C = np.hstack([np.asarray(t) for t in T.section_series])
    return C


def rigidity_probe(A, B, U_hint=None, tol=1e-6, steps=300, block_size=None):
    """Best unitary intertwiner ``U A ~ B U`` and its block structure.

    The seed is the Procrustes solution ``polar(C_B C_A^*)`` for the matched
    Taylor-coefficient frames of the flag sections (column-normalized), or
    ``polar(U_hint)``; it is refined by Riemannian gradient steps on
    ``||UA - BU||_F^2`` with polar retraction.

    Parameters
    ----------
    A, B : FlagOperator or ndarray
    U_hint : ndarray, optional
    tol : float
        Alignment tolerance on the relative residual.
    steps : int
        Maximum refinement steps.
    block_size : int, optional
        Block size for the profile (defaults to ``A.N`` for flag models).

    Returns
    -------
    IntertwinerSolution
    """
    tol = check_positive(tol, "tol")
    MA, MB = _matrix(A), _matrix(B)
    if MA.shape != MB.shape:
        raise ParameterError("operators must have the same dimension")
    bs = _block_size(A, block_size)
    if U_hint is not None:
        U = _polar(np.asarray(U_hint, dtype=complex))
    elif isinstance(A, FlagOperator) and isinstance(B, FlagOperator) and (A.n, A.N) == (B.n, B.N):
        CA, CB = _frame_coefficients(A), _frame_coefficients(B)
        scale = np.linalg.norm(CA, axis=0)
        keep = scale > 0
        CA = CA[:, keep] / scale[keep]
        CB = CB[:, keep] / scale[keep]
        U = _polar(CB @ CA.conj().T)
    else:
        U = np.eye(MA.shape[0], dtype=complex)
    m = max(np.linalg.norm(MA, 2), np.linalg.norm(MB, 2), 1e-300)
    eta = 0.25 / m**2
    res = _relres(U, MA, MB)
    for _ in range(steps):
        if res < 1e-14:
            break
        R = U @ MA - MB @ U
        G = R @ MA.conj().T - MB.conj().T @ R
        # tangent projection at U, then polar retraction
        G = G - U @ (U.conj().T @ G + G.conj().T @ U) / 2
        Unew = _polar(U - eta * G)
        new = _relres(Unew, MA, MB)
        if new >= res:
            eta /= 2
            if eta < 1e-12 / m**2:
                break
            continue
        U, res = Unew, new
    lb = unitary_lower_bound(MA, MB)
    if res <= tol:
        status = "aligned"
    elif lb > tol:
        status = "obstructed"
    else:
        status = "inconclusive"
    return IntertwinerSolution(
        X=U, residual=res, block_profile=block_profile(U, bs) if bs else None,
        unitary=True, lower_bound=lb, status=status)


def invertible_intertwiner(A, B):
    """Intertwiner ``X = C_B C_A^+`` from matched section frames.

    For strictly bidiagonal flags the coefficient columns satisfy
    ``T C = C Lambda`` with the same structure matrix ``Lambda`` for both
    models, so ``X A = B X`` holds exactly (up to rounding) whenever the
    frame matrices are invertible.

    Returns
    -------
    IntertwinerSolution
        ``status`` is ``"aligned"`` when the residual is below ``1e-8``.
    """
    if not (isinstance(A, FlagOperator) and isinstance(B, FlagOperator)):
        raise ParameterError("invertible_intertwiner needs two FlagOperator models")
    if (A.n, A.N) != (B.n, B.N):
        raise ParameterError("models must have the same block structure")
    CA, CB = _frame_coefficients(A), _frame_coefficients(B)
    X = CB @ np.linalg.pinv(CA)
    res = _relres(X, A.matrix, B.matrix)
    unitary = bool(np.linalg.norm(X.conj().T @ X - np.eye(X.shape[0]), 2) < 1e-10)
    return IntertwinerSolution(X=X, residual=res, block_profile=block_profile(X, A.N), unitary=unitary,
                               lower_bound=0.0, status="aligned" if res < 1e-8 else "inconclusive")
