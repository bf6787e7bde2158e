"""
Evaluation metrics for any model that predicts a Gaussian mixture per input.

A model is usable here if it provides ``to_t(xs)``, ``predict(ts)`` (a
``GaussianMixture`` with means ``(n, K, d)`` and covs ``(n, K, d, d)``),
``mean_trajectory(ts)`` and ``dim``.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, EmptyData, NumericalError
from .linalg import gaussian_w2_sq_isotropic_target, psd_sqrt

DEFAULT_EPS = 1e-3
DEFAULT_GRID = 1000
METRIC_COLUMNS = ("w2_bar", "energy_distance", "nll", "rmse", "sri")
METRIC_LABELS = ("W2bar", "ED", "NLL", "RMSE", "SRI")


@dataclass
class MetricsReport:
    w2_bar: float
    energy_distance: float
    nll: float
    rmse: float
    sri: float
    model_name: str = "model"
    dataset_name: str = "dataset"

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)

    @staticmethod
    def csv_header():
        return ",".join(("model", "dataset") + METRIC_COLUMNS)

    def csv_row(self):
        values = [repr(float(getattr(self, c))) for c in METRIC_COLUMNS]
        return ",".join([self.model_name, self.dataset_name] + values)


def _check_data(data):
    if len(data) == 0:
        raise EmptyData("metrics need at least one observation")


def avg_w2(model, data, eps=DEFAULT_EPS):
    """Mean over points of ``sqrt(sum_k w_k W2^2(component_k(t_i), N(y_i, eps I)))``."""
    _check_data(data)
    pred = model.predict(model.to_t(data.xs))
    per_comp = gaussian_w2_sq_isotropic_target(pred.means, pred.covs, data.ys[:, None, :], eps)
    return float(np.mean(np.sqrt(per_comp @ pred.weights)))


def _pairwise_mean(a, b, exclude_diagonal):
    dist = np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1))
    if not exclude_diagonal:
        return dist.mean()
    n = a.shape[0]
    if n < 2:
        return 0.0
    return (dist.sum() - np.trace(dist)) / (n * (n - 1))


def energy_distance(samples_pred, samples_data):
    """Plug-in energy distance ``2 E|X-Y| - E|X-X'| - E|Y-Y'|``, clamped at 0.

    Within-set expectations run over ordered pairs of distinct indices.
    """
    x = np.atleast_2d(np.asarray(samples_pred, dtype=float))
    y = np.atleast_2d(np.asarray(samples_data, dtype=float))
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise EmptyData("energy distance needs two nonempty sample sets")
    value = (
        2.0 * _pairwise_mean(x, y, False)
        - _pairwise_mean(x, x, True)
        - _pairwise_mean(y, y, True)
    )
    return max(float(value), 0.0)


def sample_predictive(model, ts, rng):
    """One draw from the predicted mixture at each ``t``."""
    pred = model.predict(ts)
    n, k, d = pred.means.shape
    comp = rng.choice(k, size=n, p=pred.weights)
    z = rng.standard_normal((n, d))
    rows = np.arange(n)
    roots = psd_sqrt(pred.covs[rows, comp])
    return pred.means[rows, comp] + np.einsum("nij,nj->ni", roots, z)


def model_energy_distance(model, data, rng):
    _check_data(data)
    samples = sample_predictive(model, model.to_t(data.xs), rng)
    return energy_distance(samples, data.ys)


def gaussian_logpdf(y, means, covs):
    """Log density of ``N(means, covs)`` at ``y``; broadcasts over leading axes."""
    d = means.shape[-1]
    diff = y - means
    chol = np.linalg.cholesky(covs)
    half_logdet = np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    sol = np.linalg.solve(chol, diff[..., None])[..., 0]
    return -0.5 * np.sum(sol * sol, axis=-1) - half_logdet - 0.5 * d * np.log(2.0 * np.pi)


def nll(model, data):
    """Average negative log-likelihood of the observations under the mixture."""
    _check_data(data)
    pred = model.predict(model.to_t(data.xs))
    try:
        logp = gaussian_logpdf(data.ys[:, None, :], pred.means, pred.covs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"covariance not positive definite: {exc}") from None
    with np.errstate(divide="ignore"):
        log_w = np.log(pred.weights)
    per_point = logsumexp(logp + log_w, axis=-1)
    if not np.all(np.isfinite(per_point)):
        raise NumericalError("non-finite mixture density")
    return float(-np.mean(per_point))


def rmse(model, data):
    _check_data(data)
    resid = model.mean_trajectory(model.to_t(data.xs)) - data.ys
    return float(np.sqrt(np.mean(np.sum(resid * resid, axis=-1))))


def sri(model, grid_size=DEFAULT_GRID):
    """Smoothness index: discretized ``int_0^1 |y''(t)|^2 dt`` of the mean trajectory.

    Uses second differences on a uniform grid with spacing ``h = 1/(grid_size-1)``
    so each difference divided by ``h^2`` approximates ``y''``.
    """
    if grid_size < 3:
        raise ConfigError("SRI grid_size must be >= 3")
    ts = np.linspace(0.0, 1.0, grid_size)
    traj = model.mean_trajectory(ts)
    second = traj[2:] - 2.0 * traj[1:-1] + traj[:-2]
    h = 1.0 / (grid_size - 1)
    return float(np.mean(np.sum(second * second, axis=-1)) / h**4)


def evaluate(model, data, eps=DEFAULT_EPS, seed=0, grid_size=DEFAULT_GRID, model_name="model"):
    """All five metrics of ``model`` on ``data``."""
    rng = np.random.default_rng(seed)
    return MetricsReport(
        w2_bar=avg_w2(model, data, eps),
        energy_distance=model_energy_distance(model, data, rng),
        nll=nll(model, data),
        rmse=rmse(model, data),
        sri=sri(model, grid_size),
        model_name=model_name,
        dataset_name=data.name,
    )
