"""
Gaussian-mixture probability trajectories with Bernstein-curve parameters.

Each of the ``K`` components carries ``N + 1`` control means and ``N + 1``
lower-triangular covariance factors ``L``; the realized control covariance
is ``L L^T + jitter * I``. Means and covariances at ``t`` are Bernstein
blends of the controls, and the components are mixed with softmax weights.

Flat parameter layout (used by the optimizer, the L2 penalty and JSON):
all control means ``[k, i, :]``, then the lower-triangular factor entries
``[k, i]`` in row-major order, then the ``K`` weight logits.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import softmax

from .bernstein import basis_eval
from .errors import ConfigError, DimMismatch, EmptyData
from .normalization import apply_normalization, normalize_inputs

DEFAULT_DEGREE = 8
DEFAULT_COMPONENTS = 1
DEFAULT_JITTER = 1e-4
MODEL_KIND = "bernstein_w2"


class GaussianMixture(NamedTuple):
    """Mixture prediction. ``means``/``covs`` carry an optional leading batch axis."""

    weights: np.ndarray  # (K,)
    means: np.ndarray  # ([n,] K, d)
    covs: np.ndarray  # ([n,] K, d, d)


GaussianMixtureAt = GaussianMixture  # single-t prediction, no batch axis


class ParamLayout(NamedTuple):
    degree: int
    components: int
    dim: int

    @property
    def n_controls(self):
        return self.degree + 1

    @property
    def n_tril(self):
        return self.dim * (self.dim + 1) // 2

    @property
    def size(self):
        k, c = self.components, self.n_controls
        return k * c * self.dim + k * c * self.n_tril + k

    def slices(self):
        k, c = self.components, self.n_controls
        n_means = k * c * self.dim
        n_fact = k * c * self.n_tril
        return (
            slice(0, n_means),
            slice(n_means, n_means + n_fact),
            slice(n_means + n_fact, n_means + n_fact + k),
        )

    def tril_indices(self):
        # np.tril_indices enumerates row-major.
        return np.tril_indices(self.dim)


@dataclass(frozen=True)
class MixtureModel:
    control_means: np.ndarray  # (K, N+1, d)
    cov_factors: np.ndarray  # (K, N+1, d, d), lower triangular
    weight_logits: np.ndarray  # (K,)
    jitter: float = DEFAULT_JITTER
    freeze_weights: bool = False
    x_min: float = 0.0
    x_max: float = 1.0

    def __post_init__(self):
        means = np.array(self.control_means, dtype=float)
        factors = np.array(self.cov_factors, dtype=float)
        logits = np.array(self.weight_logits, dtype=float).ravel()
        if means.ndim != 3:
            raise DimMismatch(f"control_means must be (K, N+1, d), got {means.shape}")
        k, c, d = means.shape
        if factors.shape != (k, c, d, d):
            raise DimMismatch(f"cov_factors must be {(k, c, d, d)}, got {factors.shape}")
        if logits.shape != (k,):
            raise DimMismatch(f"weight_logits must have length {k}, got {logits.shape}")
        if not self.jitter > 0:
            raise ConfigError("jitter must be positive")
        factors = np.tril(factors)
        for arr in (means, factors, logits):
            arr.flags.writeable = False
        object.__setattr__(self, "control_means", means)
        object.__setattr__(self, "cov_factors", factors)
        object.__setattr__(self, "weight_logits", logits)

    @property
    def layout(self):
        k, c, d = self.control_means.shape
        return ParamLayout(c - 1, k, d)

    @property
    def degree(self):
        return self.control_means.shape[1] - 1

    @property
    def n_components(self):
        return self.control_means.shape[0]

    @property
    def dim(self):
        return self.control_means.shape[2]

    @property
    def weights(self):
        return softmax(self.weight_logits)

    def control_covs(self):
        """Realized control covariances ``L L^T + jitter I``, shape (K, N+1, d, d)."""
        lower = self.cov_factors
        return lower @ np.swapaxes(lower, -1, -2) + self.jitter * np.eye(self.dim)

    def to_t(self, xs):
        return apply_normalization(xs, self.x_min, self.x_max)

    def predict(self, ts):
        """Mixture at each ``t`` in ``ts``: means (n, K, d), covs (n, K, d, d)."""
        b = basis_eval(self.degree, np.atleast_1d(np.asarray(ts, dtype=float)))
        means = np.einsum("ni,kid->nkd", b, self.control_means)
        lower = self.cov_factors
        outer = lower @ np.swapaxes(lower, -1, -2)
        # Basis weights sum to one, so the jitter term passes through unchanged.
        covs = np.einsum("ni,kide->nkde", b, outer) + self.jitter * np.eye(self.dim)
        return GaussianMixture(self.weights, means, covs)

    def predict_at(self, t):
        out = self.predict(np.array([t], dtype=float))
        return GaussianMixture(out.weights, out.means[0], out.covs[0])

    def mean_trajectory(self, ts):
        ts = np.asarray(ts, dtype=float).ravel()
        if ts.size == 0:
            return np.zeros((0, self.dim))
        out = self.predict(ts)
        return np.einsum("k,nkd->nd", out.weights, out.means)

    def to_dict(self):
        return {
            "kind": MODEL_KIND,
            "degree": self.degree,
            "K": self.n_components,
            "dim": self.dim,
            "jitter": self.jitter,
            "freeze_weights": self.freeze_weights,
            "control_means": [float(v) for v in self.control_means.ravel()],
            "cov_factors": [float(v) for v in _tril_entries(self.cov_factors)],
            "weight_logits": [float(v) for v in self.weight_logits],
            "normalization": {"x_min": self.x_min, "x_max": self.x_max},
        }

    @classmethod
    def from_dict(cls, doc):
        if doc.get("kind", MODEL_KIND) != MODEL_KIND:
            raise ConfigError(f"not a {MODEL_KIND} model document: kind={doc.get('kind')!r}")
        layout = ParamLayout(int(doc["degree"]), int(doc["K"]), int(doc["dim"]))
        vec = np.concatenate(
            [
                np.asarray(doc["control_means"], dtype=float),
                np.asarray(doc["cov_factors"], dtype=float),
                np.asarray(doc["weight_logits"], dtype=float),
            ]
        )
        norm = doc.get("normalization", {})
        return unflatten_params(
            vec,
            layout,
            jitter=float(doc["jitter"]),
            freeze_weights=bool(doc.get("freeze_weights", False)),
            x_min=float(norm.get("x_min", 0.0)),
            x_max=float(norm.get("x_max", 1.0)),
        )


def _tril_entries(factors):
    d = factors.shape[-1]
    rows, cols = np.tril_indices(d)
    return factors[..., rows, cols].ravel()


def predict_at(m, t):
    return m.predict_at(t)


def mean_trajectory(m, ts):
    return m.mean_trajectory(ts)


def flatten_params(m):
    """Flat parameter vector in the documented layout."""
    return np.concatenate(
        [m.control_means.ravel(), _tril_entries(m.cov_factors), m.weight_logits]
    )


def unflatten_params(vec, layout, **fields):
    """Inverse of :func:`flatten_params`; ``fields`` pass through to the model."""
    vec = np.asarray(vec, dtype=float).ravel()
    if vec.size != layout.size:
        raise DimMismatch(f"expected {layout.size} parameters, got {vec.size}")
    k, c, d = layout.components, layout.n_controls, layout.dim
    s_mean, s_fact, s_logit = layout.slices()
    factors = np.zeros((k, c, d, d))
    rows, cols = layout.tril_indices()
    factors[..., rows, cols] = vec[s_fact].reshape(k, c, layout.n_tril)
    return MixtureModel(vec[s_mean].reshape(k, c, d), factors, vec[s_logit], **fields)


def with_params(m, vec):
    """Copy of ``m`` with its parameters replaced by ``vec``."""
    return unflatten_params(
        vec,
        m.layout,
        jitter=m.jitter,
        freeze_weights=m.freeze_weights,
        x_min=m.x_min,
        x_max=m.x_max,
    )


def init_model(
    data,
    degree=DEFAULT_DEGREE,
    components=DEFAULT_COMPONENTS,
    seed=0,
    jitter=DEFAULT_JITTER,
    freeze_weights=False,
    init_var=0.0,
):
    """Data-anchored initial model.

    Control mean ``i`` of every component starts at the observation whose
    normalized input is nearest to ``i / N``, perturbed by Gaussian noise
    with per-axis scale ``0.05 * range(y)``. Covariance factors start at
    ``sqrt(init_var) * I`` (covariance ``(init_var + jitter) I``) and logits
    at zero (uniform weights).

    Note that ``init_var=0`` is a stationary point for the factors under the
    W2 risk (its factor gradient is ``2 G L``); training passes a positive value.
    """
    if len(data) == 0:
        raise EmptyData("cannot initialize a model from an empty dataset")
    if degree < 1 or components < 1:
        raise ConfigError("degree and components must be >= 1")
    if len(data) >= 2 and np.ptp(data.xs) > 0:
        norm = normalize_inputs(data.xs)
        ts, x_min, x_max = norm.ts, norm.x_min, norm.x_max
    else:
        x0 = float(data.xs[0])
        ts, x_min, x_max = np.zeros(len(data)), x0, x0 + 1.0
    ys = data.ys
    d = ys.shape[1]
    anchors = np.arange(degree + 1) / degree
    nearest = np.argmin(np.abs(ts[None, :] - anchors[:, None]), axis=1)
    base = ys[nearest]
    scale = 0.05 * np.ptp(ys, axis=0)
    rng = np.random.default_rng(seed)
    means = base[None] + scale * rng.standard_normal((components, degree + 1, d))
    if init_var < 0:
        raise ConfigError("init_var must be nonnegative")
    factors = np.broadcast_to(np.sqrt(init_var) * np.eye(d), (components, degree + 1, d, d))
    return MixtureModel(
        means,
        factors,
        np.zeros(components),
        jitter=jitter,
        freeze_weights=freeze_weights,
        x_min=x_min,
        x_max=x_max,
    )


def save_model(m, path):
    Path(path).write_text(json.dumps(m.to_dict(), indent=2) + "\n")


def load_model(path):
    return MixtureModel.from_dict(json.loads(Path(path).read_text()))
