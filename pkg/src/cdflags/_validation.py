"""Small input-checking helpers and sample grids."""

import numpy as np

from .errors import DomainError, ParameterError

_RADIUS_SLACK = 1e-12


def as_point(w, name="w"):
    """Coerce ``w`` to a Python complex, rejecting non-finite values."""
    try:
        z = complex(w)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a complex number, got {w!r}") from exc
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ParameterError(f"{name} must be finite, got {w!r}")
    return z


def check_in_disk(w, radius, name="w"):
    """Raise :class:`DomainError` if ``|w| > radius``."""
    z = as_point(w, name)
    if abs(z) > radius + _RADIUS_SLACK:
        raise DomainError(f"|{name}| = {abs(z):.6g} exceeds the accuracy radius {radius:.6g}")
    return z


def check_positive(x, name):
    x = float(x)
    if not (np.isfinite(x) and x > 0):
        raise ParameterError(f"{name} must be a positive real, got {x!r}")
    return x


def check_int(x, name, minimum=None):
    if isinstance(x, bool) or int(x) != x:
        raise ParameterError(f"{name} must be an integer, got {x!r}")
    x = int(x)
    if minimum is not None and x < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {x}")
    return x


def disk_grid(radii=5, angles=8, rmax=0.5):
    """Polar sample grid inside the disk ``|w| <= rmax``.

    Parameters
    ----------
    radii, angles : int
        Number of radii ``rmax * k / radii`` (``k = 1..radii``) and of
        equally spaced angles ``2 pi j / angles``.
    rmax : float
        Outer radius, must lie in (0, 1).

    Returns
    -------
    ndarray of complex, shape (radii * angles,)
        Points ordered radius-major.
    """
    radii = check_int(radii, "radii", 1)
    angles = check_int(angles, "angles", 1)
    rmax = float(rmax)
    if not 0 < rmax < 1:
        raise ParameterError(f"rmax must lie in (0, 1), got {rmax}")
    r = rmax * np.arange(1, radii + 1) / radii
    theta = 2 * np.pi * np.arange(angles) / angles
    return (r[:, None] * np.exp(1j * theta)[None, :]).ravel()


def as_grid(grid):
    """Normalize a grid argument to a 1-d complex array (``None`` -> default)."""
    if grid is None:
        return disk_grid()
    g = np.atleast_1d(np.asarray(grid, dtype=complex)).ravel()
    if g.size == 0:
        raise ParameterError("grid must contain at least one point")
    if not np.all(np.isfinite(g)):
        raise ParameterError("grid points must be finite")
    return g
