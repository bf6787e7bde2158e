"""Bernstein basis and Bezier-style curves over mean / covariance controls."""

from functools import lru_cache
from math import comb

import numpy as np

from .errors import ConfigError, DimMismatch, DomainError
from .linalg import spd_matrix

MAX_DEGREE = 60


@lru_cache(maxsize=None)
def binomials(degree):
    """Exact binomial coefficients ``C(degree, i)`` for ``i = 0..degree``."""
    if not 0 <= degree <= MAX_DEGREE:
        raise ConfigError(f"Bernstein degree must be in [0, {MAX_DEGREE}], got {degree}")
    return tuple(comb(degree, i) for i in range(degree + 1))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError("t must lie in [0, 1]")
    return t


def basis_eval(degree, t):
    """Evaluate all degree-``N`` Bernstein polynomials at ``t``.

    Parameters
    ----------
    degree : int
        Polynomial degree ``N``.
    t : float or array_like, shape (n,)
        Evaluation points in ``[0, 1]``.

    Returns
    -------
    ndarray, shape (N+1,) or (n, N+1)
        ``C(N, i) (1 - t)^(N - i) t^i`` in column ``i``.
    """
    coeffs = np.array(binomials(degree), dtype=float)
    t = _check_t(t)
    i = np.arange(degree + 1)
    tt = t[..., None]
    return coeffs * (1.0 - tt) ** (degree - i) * tt ** i


def mean_at(controls, t):
    """Point on the curve with control points ``controls`` (shape ``(N+1, d)``)."""
    controls = np.asarray(controls, dtype=float)
    if controls.ndim != 2 or controls.shape[0] == 0:
        raise DimMismatch(f"controls must have shape (N+1, d), got {controls.shape}")
    weights = basis_eval(controls.shape[0] - 1, t)
    return weights @ controls


def cov_at(controls, t):
    """Convex Bernstein combination of PSD control matrices ``(N+1, d, d)``."""
    controls = np.asarray(controls, dtype=float)
    if controls.ndim != 3 or controls.shape[0] == 0 or controls.shape[1] != controls.shape[2]:
        raise DimMismatch(f"controls must have shape (N+1, d, d), got {controls.shape}")
    controls = spd_matrix(controls)
    weights = basis_eval(controls.shape[0] - 1, t)
    return np.tensordot(weights, controls, axes=(-1, 0))
