"""
Small dense SPD numerics: symmetric eigendecomposition, PSD square roots
and the closed-form 2-Wasserstein distance between Gaussians.

All functions accept a single ``(d, d)`` matrix or a stack ``(..., d, d)``
and broadcast over the leading axes.
"""

from typing import NamedTuple

import numpy as np

from .errors import DimMismatch, InvalidMatrix, NotPsd

# Eigenvalues below -PSD_TOL * max|lambda| are an error; above, clamped to 0.
PSD_TOL = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # (..., d), ascending
    eigenvectors: np.ndarray  # (..., d, d), columns


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _check_square(a):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimMismatch(f"expected square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")


def spd_matrix(a):
    """Validate and return ``a`` as a symmetric PSD matrix (or stack).

    The input is symmetrized and eigenvalues in the round-off band
    ``[-1e-10 * max|lambda|, 0)`` are clamped to zero. Anything more
    negative raises :class:`NotPsd`.
    """
    a = np.asarray(a, dtype=float)
    _check_square(a)
    lam, vec = sym_eigen(a)
    if np.all(lam >= 0.0):
        return symmetrize(a)
    lam = _clamp_eigenvalues(lam)
    return symmetrize((vec * lam[..., None, :]) @ np.swapaxes(vec, -1, -2))


def sym_eigen(a):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    a = np.asarray(a, dtype=float)
    _check_square(a)
    lam, vec = np.linalg.eigh(symmetrize(a))
    return EigenDecomposition(lam, vec)


def _clamp_eigenvalues(lam):
    scale = np.max(np.abs(lam), axis=-1, keepdims=True)
    if np.any(lam < -PSD_TOL * scale):
        raise NotPsd(f"matrix is not positive semidefinite (min eigenvalue {lam.min():.3e})")
    return np.maximum(lam, 0.0)


def psd_sqrt(a):
    """Symmetric positive square root ``R`` with ``R @ R == a``."""
    lam, vec = sym_eigen(a)
    root = np.sqrt(_clamp_eigenvalues(lam))
    return symmetrize((vec * root[..., None, :]) @ np.swapaxes(vec, -1, -2))


def trace_sqrt(a):
    """``Tr(a^{1/2})`` for PSD ``a``."""
    lam, _ = sym_eigen(a)
    return np.sum(np.sqrt(_clamp_eigenvalues(lam)), axis=-1)


def trace_sqrt_grad(a):
    """Gradient of ``Tr(a^{1/2})`` with respect to a positive definite ``a``.

    Equals ``0.5 * a^{-1/2}`` (already symmetric). Raises :class:`NotPsd`
    if ``a`` is singular, where the derivative is unbounded.
    """
    lam, vec = sym_eigen(a)
    lam = _clamp_eigenvalues(lam)
    if np.any(lam <= 0.0):
        raise NotPsd("trace-sqrt gradient undefined for singular matrix")
    inv_root = 0.5 / np.sqrt(lam)
    return symmetrize((vec * inv_root[..., None, :]) @ np.swapaxes(vec, -1, -2))


def sqrt_frechet_adjoint(a, g):
    """Adjoint of the Frechet derivative of ``X -> X^{1/2}`` at ``a``.

    For a scalar objective ``f(a^{1/2})`` with upstream gradient ``g``
    (gradient w.r.t. the square root), returns the gradient w.r.t. ``a``.
    Uses the Daleckii-Krein divided differences written as
    ``1 / (sqrt(l_i) + sqrt(l_j))``, which stays finite for repeated
    eigenvalues as long as ``a`` is nonsingular.
    """
    lam, vec = sym_eigen(a)
    root = np.sqrt(_clamp_eigenvalues(lam))
    denom = root[..., :, None] + root[..., None, :]
    if np.any(denom <= 0.0):
        raise NotPsd("square-root derivative undefined for singular matrix")
    vt = np.swapaxes(vec, -1, -2)
    inner = vt @ symmetrize(g) @ vec
    return symmetrize(vec @ (inner / denom) @ vt)


def _check_gaussian_dims(mu, s):
    if s.shape[-1] != s.shape[-2] or mu.shape[-1] != s.shape[-1]:
        raise DimMismatch(f"mean shape {mu.shape} incompatible with covariance shape {s.shape}")


def gaussian_w2_sq(mu1, s1, mu2, s2):
    """Squared 2-Wasserstein distance between ``N(mu1, s1)`` and ``N(mu2, s2)``.

    ``|mu1 - mu2|^2 + Tr(s1 + s2 - 2 (s2^{1/2} s1 s2^{1/2})^{1/2})``,
    floored at zero.
    """
    mu1, mu2 = np.asarray(mu1, dtype=float), np.asarray(mu2, dtype=float)
    s1, s2 = np.asarray(s1, dtype=float), np.asarray(s2, dtype=float)
    _check_gaussian_dims(mu1, s1)
    _check_gaussian_dims(mu2, s2)
    if mu1.shape[-1] != mu2.shape[-1]:
        raise DimMismatch(f"dimension mismatch: {mu1.shape[-1]} vs {mu2.shape[-1]}")
    root2 = psd_sqrt(s2)
    cross = trace_sqrt(root2 @ spd_matrix(s1) @ root2)
    cov_term = np.trace(s1, axis1=-2, axis2=-1) + np.trace(s2, axis1=-2, axis2=-1) - 2.0 * cross
    diff = mu1 - mu2
    return np.maximum(np.sum(diff * diff, axis=-1) + cov_term, 0.0)


def gaussian_w2_sq_isotropic_target(mu1, s1, y, eps):
    """Squared W2 between ``N(mu1, s1)`` and the isotropic target ``N(y, eps I)``.

    Since ``eps I`` commutes with everything the cross term collapses:
    the covariance part is ``sum_i (sqrt(lambda_i) - sqrt(eps))^2`` over the
    eigenvalues of ``s1``, which is nonnegative by construction.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    mu1, y = np.asarray(mu1, dtype=float), np.asarray(y, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    _check_gaussian_dims(mu1, s1)
    if y.shape[-1] != mu1.shape[-1]:
        raise DimMismatch(f"dimension mismatch: {mu1.shape[-1]} vs {y.shape[-1]}")
    lam, _ = sym_eigen(s1)
    root = np.sqrt(_clamp_eigenvalues(lam))
    diff = mu1 - y
    return np.sum(diff * diff, axis=-1) + np.sum((root - np.sqrt(eps)) ** 2, axis=-1)
