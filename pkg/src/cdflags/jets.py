"""Jet-module actions of the polynomial ring and their localizations.

A lower-triangular ``k x k`` matrix ``mu`` (1-indexed, ``mu_{i,i} = 1``)
defines the action

.. math:: \\mathcal J_\\mu(f)(w)_{i,j} = \\mu_{i,j}\\, f^{(i-j)}(w), \\qquad i \\ge j,

which is multiplicative, ``J(fg) = J(f) J(g)``, exactly when

.. math:: \\mu_{p,l}\\,\\mu_{l,i} = \\binom{p-i}{l-i}\\,\\mu_{p,i},
          \\qquad i \\le l \\le p.

Such a ``mu`` is determined by its first subdiagonal ``mu_{l+1,l}``:
``mu_{p,i} = prod_{l=i}^{p-1} mu_{l+1,l} / (p-i)!``.

Indices in this module follow the 1-based mathematical convention in
names and messages; arrays are 0-based.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Rational

import numpy as np
from numpy.polynomial import Polynomial

from ._validation import as_grid, as_point, check_int
from .errors import ParameterError, SpecError
from .kernels import eval_jet

FLOAT_TOL = 1e-10
DEGREE_CAP = 64
FAMILIES = ("binomial", "inverse-factorial")

__all__ = [
    "JetSpec",
    "MuVerdict",
    "LocalizationVerdict",
    "validate_mu",
    "jet_action",
    "find_violating_monomials",
    "b_coefficients",
    "localization_kernel",
    "classify_localizations",
    "mu_family",
]


def _entry(x):
    """Parse one matrix entry: rationals stay exact, floats stay floats."""
    if isinstance(x, bool):
        raise ParameterError("boolean is not a valid matrix entry")
    if isinstance(x, (Integral, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"cannot parse matrix entry {x!r}") from exc
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"cannot parse matrix entry {x!r}") from exc
    if not np.isfinite(v):
        raise ParameterError("matrix entries must be finite")
    return v


def _lower_rows(mu):
    """Normalize ``mu`` to a tuple of lower-triangular rows.

    Accepts ragged rows (row ``p`` has ``p`` entries) or a square matrix
    whose strictly upper part is zero.
    """
    rows = [list(r) for r in (mu.tolist() if isinstance(mu, np.ndarray) else mu)]
    k = len(rows)
    if k == 0:
        raise ParameterError("mu must have at least one row")
    ragged = all(len(r) == p + 1 for p, r in enumerate(rows))
    square = all(len(r) == k for r in rows)
    if not (ragged or square):
        raise ParameterError("mu must be square or given as lower-triangular rows")
    out = []
    for p, r in enumerate(rows):
        vals = [_entry(x) for x in r]
        if square and any(v != 0 for v in vals[p + 1:]):
            raise ParameterError("mu is not lower-triangular")
        out.append(tuple(vals[: p + 1]))
    return tuple(out)


def _exact(rows):
    return all(isinstance(v, Fraction) for r in rows for v in r)


def _close(a, b, exact):
    if exact:
        return a == b
    return abs(a - b) <= FLOAT_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class MuVerdict:
    """Outcome of :func:`validate_mu`.

    ``violation`` is ``None`` for a valid matrix, ``("diagonal", i)`` for a
    non-unit diagonal entry, or the lexicographically first violated
    triple ``(p, l, i)`` (1-indexed).
    """

    valid: bool
    violation: tuple = None
    exact: bool = False
    message: str = ""


def validate_mu(mu):
    """Check the structural constraints of a jet-module matrix.

    Parameters
    ----------
    mu : sequence of sequences
        Square lower-triangular matrix or ragged lower-triangular rows.
        Integer, ``Fraction`` and string (``"1/2"``, ``"0.25"``) entries are
        checked in exact rational arithmetic; floats to relative ``1e-10``.

    Returns
    -------
    MuVerdict

    Examples
    --------
    >>> validate_mu([[1], [1, 1]]).valid
    True
    >>> validate_mu([[1], [1, 1], [1.1, 2, 1]]).violation
    (3, 2, 1)
    """
    rows = _lower_rows(mu)
    exact = _exact(rows)
    k = len(rows)
    for i in range(k):
        if not _close(rows[i][i], 1, exact):
            return MuVerdict(False, ("diagonal", i + 1), exact, f"mu_{i + 1},{i + 1} = {rows[i][i]} != 1")
    for p in range(k):
        for l in range(p + 1):
            for i in range(l + 1):
                lhs = rows[p][l] * rows[l][i]
                rhs = math.comb(p - i, l - i) * rows[p][i]
                if not _close(lhs, rhs, exact):
                    t = (p + 1, l + 1, i + 1)
                    return MuVerdict(False, t, exact,
                                     f"mu_{t[0]},{t[1]} mu_{t[1]},{t[2]} = {lhs} != {rhs}")
    return MuVerdict(True, None, exact, "valid")


def mu_family(name, k):
    """Named valid families: ``"binomial"`` (``C(p-1, l-1)``) and
    ``"inverse-factorial"`` (``1/(p-l)!``)."""
    k = check_int(k, "k", 1)
    if name == "binomial":
        return tuple(tuple(Fraction(math.comb(p, l)) for l in range(p + 1)) for p in range(k))
    if name == "inverse-factorial":
        return tuple(tuple(Fraction(1, math.factorial(p - l)) for l in range(p + 1)) for p in range(k))
    raise ParameterError(f"unknown mu family {name!r}; expected one of {FAMILIES}")


@dataclass(frozen=True, eq=False)
class JetSpec:
    """Validated jet-module specification.

    Construct with :meth:`from_rows`, :meth:`from_superdiagonal` or
    :meth:`family`.  The ``rows`` hold ``mu`` as lower-triangular rows.
    """

    rows: tuple

    def __post_init__(self):
        rows = _lower_rows(self.rows)
        v = validate_mu(rows)
        if not v.valid:
            raise SpecError(f"invalid mu: {v.message} (violation {v.violation})")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows):
        return cls(rows)

    @classmethod
    def from_superdiagonal(cls, values):
        """The unique valid spec with ``mu_{l+1,l} = values[l-1]``."""
        vals = [_entry(v) for v in values]
        k = len(vals) + 1
        rows = []
        for p in range(k):
            row = []
            for i in range(p + 1):
                prod = Fraction(1) if all(isinstance(v, Fraction) for v in vals[i:p]) else 1.0
                for v in vals[i:p]:
                    prod = prod * v
                row.append(prod / math.factorial(p - i))
            rows.append(tuple(row))
        return cls(tuple(rows))

    @classmethod
    def family(cls, name, k):
        return cls(mu_family(name, k))

    @property
    def k(self):
        return len(self.rows)

    @property
    def exact(self):
        return _exact(self.rows)

    @property
    def mu(self):
        """Square float matrix of ``mu``."""
        M = np.zeros((self.k, self.k))
        for p, r in enumerate(self.rows):
            M[p, : p + 1] = [float(v) for v in r]
        return M

    @property
    def superdiagonal(self):
        """``(mu_{2,1}, .., mu_{k,k-1})`` as floats."""
        return tuple(float(self.rows[l + 1][l]) for l in range(self.k - 1))

    @cached_property
    def b(self):
        """Localization frame coefficients, see :func:`b_coefficients`."""
        return b_coefficients(self)

    def D(self, l):
        """Diagonal of ``D(l)`` (1-indexed ``l``), padded to length ``k``.

        The non-zero part sits on the trailing ``k - l + 1`` positions,
        aligned with the zero-padded jet block ``J_{k-l+1} K``; its
        block-local entry ``m`` is ``b_{m+l-1, l}``.
        """
        l = check_int(l, "l", 1)
        if l > self.k:
            raise ParameterError(f"l must be <= k = {self.k}")
        d = np.zeros(self.k)
        B = self.b
        for q in range(l - 1, self.k):
            d[q] = float(B[q][l - 1])
        return d


def _as_spec(spec):
    return spec if isinstance(spec, JetSpec) else JetSpec(spec)


def _coefficients(f):
    if isinstance(f, Polynomial):
        c = list(f.coef)
    else:
        c = list(np.atleast_1d(f)) if not isinstance(f, (list, tuple)) else list(f)
    if len(c) - 1 > DEGREE_CAP:
        raise ParameterError(f"polynomial degree {len(c) - 1} exceeds the cap {DEGREE_CAP}")
    return c


def _derivative_at(c, m, w):
    """``f^{(m)}(w)`` for coefficients ``c`` (exact for rational input)."""
    total = 0
    for n in range(m, len(c)):
        total = total + c[n] * math.perm(n, m) * w ** (n - m)
    return total


def jet_action(spec, f, w):
    """Matrix ``J_mu(f)(w)`` with entries ``mu_{i,j} f^{(i-j)}(w)``.

    Parameters
    ----------
    spec : JetSpec or mu rows
        Rejected with :class:`SpecError` when invalid.
    f : numpy.polynomial.Polynomial or sequence
        Coefficients in increasing degree.
    w : complex

    Returns
    -------
    ndarray of complex, shape (k, k)
    """
    spec = _as_spec(spec)
    c = [complex(x) for x in _coefficients(f)]
    w = as_point(w)
    k = spec.k
    derivs = [_derivative_at(c, m, w) for m in range(k)]
    J = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(i + 1):
            J[i, j] = float(spec.rows[i][j]) * derivs[i - j]
    return J


def find_violating_monomials(mu):
    """Search monomial pairs ``z^a, z^b`` (``a, b <= k``) breaking multiplicativity.

    The action is evaluated at ``w = 1`` exactly (rational ``mu``) or in
    floating point.  Because each entry of ``J(fg) - J(f) J(g)`` is, at
    ``w = 1``, a polynomial of degree below ``k`` in each of ``a`` and
    ``b``, vanishing on all pairs with ``a, b <= k`` implies
    multiplicativity for every polynomial.

    Parameters
    ----------
    mu : sequence of sequences
        Need not be valid.

    Returns
    -------
    tuple or None
        ``(a, b, (i, j), defect)`` for the first violating pair (entry
        1-indexed), or ``None`` when the action is multiplicative.
    """
    rows = _lower_rows(mu)
    exact = _exact(rows)
    k = len(rows)

    def J(deg):
        # column of derivatives of z^deg at 1 is the falling factorial
        d = [math.perm(deg, m) for m in range(k)]
        return [[rows[i][j] * d[i - j] if j <= i else 0 for j in range(k)] for i in range(k)]

    for a in range(k + 1):
        Ja = J(a)
        for b in range(k + 1):
            Jb, Jab = J(b), J(a + b)
            for i in range(k):
                for j in range(i + 1):
                    prod = sum(Ja[i][l] * Jb[l][j] for l in range(j, i + 1))
                    if not _close(prod, Jab[i][j], exact):
                        return a, b, (i + 1, j + 1), prod - Jab[i][j]
    return None


def b_coefficients(spec):
    """Coefficients ``b_{p,l}`` of the localized frame ``e_p(w)``.

    With the normalization ``b_{p,p} = 1`` the values are filled in
    descending ``l`` using the relation at ``j = p - l``,
    ``b_{p,l} = mu_{l+1,l} / (p - l) * b_{p,l+1}``, and then checked
    against the relation

    .. math:: b_{p,l} = \\frac{\\mu_{p-j+1,l}}{\\binom{p-l}{j-1}}\\, b_{p,p-j+1}

    for every admissible ``1 <= j <= p - l``.

    Returns
    -------
    tuple of tuples
        Lower-triangular rows (exact when ``mu`` is rational).

    Raises
    ------
    SpecError
        On a cross-``j`` inconsistency above ``1e-10``.
    """
    spec = _as_spec(spec)
    mu = spec.rows
    exact = spec.exact
    k = spec.k
    one = Fraction(1) if exact else 1.0
    b = [[0] * (p + 1) for p in range(k)]
    for p in range(k):
        b[p][p] = one
        for l in range(p - 1, -1, -1):
            b[p][l] = mu[l + 1][l] / (p - l) * b[p][l + 1]
    # 1-indexed relation with P = p + 1, L = l + 1: mu index P - j + 1 -> p - j + 1
    for p in range(k):
        for l in range(p):
            for j in range(1, p - l + 1):
                rhs = mu[p - j + 1][l] / math.comb(p - l, j - 1) * b[p][p - j + 1]
                if not _close(b[p][l], rhs, exact):
                    raise SpecError(f"b_{p + 1},{l + 1} depends on j (j = {j}): {b[p][l]} != {rhs}")
    return tuple(tuple(r) for r in b)


def localization_kernel(spec, K, z, w):
    """Reproducing kernel of the localized jet module.

    .. math:: J_{\\rm loc} K(z, w) = \\sum_{l=1}^{k} D(l)\\, J_{k-l+1}K(z,w)\\, D(l),

    where ``J_r K`` is the ``r x r`` jet of ``K`` placed in the bottom-right
    corner of a ``k x k`` zero matrix.  Entry ``(q, p)`` equals
    ``sum_l b_{q,l} b_{p,l} d_z^{q-l} d_{wbar}^{p-l} K(z, w)``.

    Returns
    -------
    ndarray, shape (k, k)
        Hermitian positive semi-definite when ``z = w``.
    """
    spec = _as_spec(spec)
    k = spec.k
    Jt = eval_jet(K, z, w, k).entries
    out = np.zeros((k, k), dtype=complex)
    for l in range(1, k + 1):
        r = k - l + 1
        Jr = np.zeros((k, k), dtype=complex)
        Jr[k - r:, k - r:] = Jt[:r, :r]
        d = spec.D(l)
        out += d[:, None] * Jr * d[None, :]
    return out


@dataclass(frozen=True)
class LocalizationVerdict:
    """Isomorphism decision for two localized jet modules.

    ``isomorphic`` comes from the unitary invariants of the two model
    operators; ``expected`` is equality of the ``mu`` superdiagonals; the
    decision is ``consistent`` when they agree.
    """

    isomorphic: bool
    expected: bool
    consistent: bool
    max_curvature_gap: float
    max_ratio_gap: float


def classify_localizations(specA, specB, K, N=24, grid=None, tol=1e-6):
    """Decide whether two localized jet modules are isomorphic.

    Builds both bidiagonal model operators (only the superdiagonal of
    ``mu`` enters) and compares their unitary invariants.
    """
    from .flags import build_jet_model
    from .invariants import decide_equivalence

    specA, specB = _as_spec(specA), _as_spec(specB)
    if specA.k != specB.k:
        raise ParameterError("jet specs must have the same order k")
    A = build_jet_model(K, specA.superdiagonal, N)
    B = build_jet_model(K, specB.superdiagonal, N)
    v = decide_equivalence(A, B, as_grid(grid), tol)
    expected = bool(np.allclose(specA.superdiagonal, specB.superdiagonal, rtol=0, atol=FLOAT_TOL))
    return LocalizationVerdict(v.equivalent, expected, v.equivalent == expected,
                               v.max_curvature_gap, v.max_ratio_gap)
