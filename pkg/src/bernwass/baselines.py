"""
Classical comparators: per-dimension polynomial least squares and
squared-exponential Gaussian process regression.

Both expose the mixture prediction interface used by :mod:`bernwass.metrics`
as a single Gaussian component (``K = 1``).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular

from .errors import ConfigError, NumericalError, TooFewPoints
from .model import GaussianMixture
from .normalization import apply_normalization, normalize_inputs

POLY_DEFAULT_DEGREE = 10
POLY_VAR_JITTER = 1e-8
GPR_DEFAULTS = {"lengthscale": 0.1, "signal_var": 1.0, "noise_var": 1e-3}
GPR_VAR_FLOOR = 1e-12

# Log-spaced grid searched by gpr_tune.
GPR_GRID = {
    "lengthscale": np.logspace(-2.5, 0.0, 11),
    "signal_var": np.logspace(-1.0, 1.0, 5),
    "noise_var": np.logspace(-6.0, -1.0, 11),
}


def _single_component(means, var_diag):
    n, d = means.shape
    covs = np.zeros((n, 1, d, d))
    idx = np.arange(d)
    covs[:, 0, idx, idx] = var_diag
    return GaussianMixture(np.ones(1), means[:, None, :], covs)


@dataclass(frozen=True)
class PolyModel:
    degree: int
    coefs: np.ndarray  # (degree+1, d), increasing powers of t
    resid_var: np.ndarray  # (d,)
    x_min: float = 0.0
    x_max: float = 1.0

    @property
    def dim(self):
        return self.coefs.shape[1]

    def to_t(self, xs):
        return apply_normalization(xs, self.x_min, self.x_max)

    def mean_trajectory(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.vander(ts, self.degree + 1, increasing=True) @ self.coefs

    def predict(self, ts):
        means = self.mean_trajectory(ts)
        var = np.broadcast_to(self.resid_var + POLY_VAR_JITTER, means.shape)
        return _single_component(means, var)

    def to_dict(self):
        return {
            "kind": "polynomial",
            "degree": self.degree,
            "coefs": self.coefs.tolist(),
            "resid_var": self.resid_var.tolist(),
            "normalization": {"x_min": self.x_min, "x_max": self.x_max},
        }

    @classmethod
    def from_dict(cls, doc):
        norm = doc["normalization"]
        return cls(
            int(doc["degree"]),
            np.asarray(doc["coefs"], dtype=float),
            np.asarray(doc["resid_var"], dtype=float),
            float(norm["x_min"]),
            float(norm["x_max"]),
        )


def poly_fit(data, degree=POLY_DEFAULT_DEGREE):
    """Least-squares polynomial in normalized ``t`` per output dimension (QR)."""
    if degree < 0:
        raise ConfigError("polynomial degree must be >= 0")
    n = len(data)
    if n < degree + 1:
        raise TooFewPoints(f"degree {degree} needs at least {degree + 1} points, got {n}")
    if n >= 2 and np.ptp(data.xs) > 0:
        norm = normalize_inputs(data.xs)
        ts, x_min, x_max = norm.ts, norm.x_min, norm.x_max
    else:
        ts, x_min, x_max = np.zeros(n), float(data.xs[0]), float(data.xs[0]) + 1.0
    vander = np.vander(ts, degree + 1, increasing=True)
    q, r = np.linalg.qr(vander)
    coefs = solve_triangular(r, q.T @ data.ys)
    resid = data.ys - vander @ coefs
    dof = n - degree - 1
    resid_var = np.sum(resid * resid, axis=0) / dof if dof > 0 else np.zeros(data.dim)
    return PolyModel(degree, coefs, resid_var, x_min, x_max)


def poly_predict(m, t):
    pred = m.predict(np.atleast_1d(t))
    return pred.means[0, 0], pred.covs[0, 0]


def se_kernel(a, b, lengthscale, signal_var):
    diff = np.asarray(a, dtype=float)[:, None] - np.asarray(b, dtype=float)[None, :]
    return signal_var * np.exp(-0.5 * (diff / lengthscale) ** 2)


@dataclass(frozen=True)
class GprModel:
    lengthscale: float
    signal_var: float
    noise_var: float
    train_ts: np.ndarray
    train_ys: np.ndarray
    x_min: float = 0.0
    x_max: float = 1.0
    _chol: tuple = field(default=None, repr=False, compare=False)
    dual: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.train_ys.shape[1]

    def to_t(self, xs):
        return apply_normalization(xs, self.x_min, self.x_max)

    def _posterior(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k_star = se_kernel(ts, self.train_ts, self.lengthscale, self.signal_var)
        mean = k_star @ self.dual
        v = cho_solve(self._chol, k_star.T)
        var = self.signal_var - np.sum(k_star.T * v, axis=0)
        return mean, np.maximum(var, GPR_VAR_FLOOR)

    def mean_trajectory(self, ts):
        return self._posterior(ts)[0]

    def predict(self, ts):
        mean, var = self._posterior(ts)
        return _single_component(mean, np.repeat(var[:, None], self.dim, axis=1))

    def to_dict(self):
        return {
            "kind": "gpr",
            "lengthscale": self.lengthscale,
            "signal_var": self.signal_var,
            "noise_var": self.noise_var,
            "train_ts": self.train_ts.tolist(),
            "train_ys": self.train_ys.tolist(),
            "normalization": {"x_min": self.x_min, "x_max": self.x_max},
        }

    @classmethod
    def from_dict(cls, doc):
        norm = doc["normalization"]
        return _gpr_from_ts(
            np.asarray(doc["train_ts"], dtype=float),
            np.asarray(doc["train_ys"], dtype=float),
            float(doc["lengthscale"]),
            float(doc["signal_var"]),
            float(doc["noise_var"]),
            float(norm["x_min"]),
            float(norm["x_max"]),
        )


def _gpr_from_ts(ts, ys, lengthscale, signal_var, noise_var, x_min, x_max):
    if min(lengthscale, signal_var, noise_var) <= 0:
        raise ConfigError("GPR hyperparameters must be positive")
    gram = se_kernel(ts, ts, lengthscale, signal_var) + noise_var * np.eye(ts.size)
    try:
        chol = cho_factor(gram, lower=True)
    except LinAlgError as exc:
        raise NumericalError(f"GPR kernel matrix is not positive definite: {exc}") from None
    dual = cho_solve(chol, ys)
    return GprModel(lengthscale, signal_var, noise_var, ts, ys, x_min, x_max, chol, dual)


def gpr_fit(data, lengthscale=None, signal_var=None, noise_var=None):
    """Exact GP posterior with kernel ``s^2 exp(-(t - t')^2 / (2 l^2))``."""
    if len(data) < 2:
        raise TooFewPoints("GPR needs at least 2 points")
    norm = normalize_inputs(data.xs)
    hyper = dict(GPR_DEFAULTS)
    for key, val in (("lengthscale", lengthscale), ("signal_var", signal_var), ("noise_var", noise_var)):
        if val is not None:
            hyper[key] = float(val)
    return _gpr_from_ts(
        norm.ts, np.array(data.ys), hyper["lengthscale"], hyper["signal_var"], hyper["noise_var"],
        norm.x_min, norm.x_max,
    )


def log_marginal_likelihood(m):
    """Sum over output dimensions of the GP log evidence."""
    n, d = m.train_ys.shape
    lower = m._chol[0]
    half_logdet = np.sum(np.log(np.diag(lower)))
    fit = np.sum(m.train_ys * m.dual)
    return float(-0.5 * fit - d * half_logdet - 0.5 * n * d * np.log(2.0 * np.pi))


def gpr_tune(data, grid=None):
    """Grid search of (lengthscale, signal_var, noise_var) maximizing the evidence."""
    grid = grid or GPR_GRID
    best, best_lml = None, -np.inf
    for ell in grid["lengthscale"]:
        for sf in grid["signal_var"]:
            for sn in grid["noise_var"]:
                try:
                    m = gpr_fit(data, ell, sf, sn)
                except NumericalError:
                    continue
                lml = log_marginal_likelihood(m)
                if lml > best_lml:
                    best, best_lml = m, lml
    if best is None:
        raise NumericalError("no grid point produced a positive definite kernel matrix")
    return best


def gpr_predict(m, t):
    pred = m.predict(np.atleast_1d(t))
    return pred.means[0, 0], pred.covs[0, 0]


def save_baseline(m, path):
    Path(path).write_text(json.dumps(m.to_dict(), indent=2) + "\n")


def baseline_from_dict(doc):
    kind = doc.get("kind")
    if kind == "polynomial":
        return PolyModel.from_dict(doc)
    if kind == "gpr":
        return GprModel.from_dict(doc)
    raise ConfigError(f"unknown baseline kind {kind!r}")
