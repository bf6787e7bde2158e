"""
Empirical W2 risk, its analytic gradient, and Adam mini-batch training.

The risk for a batch of normalized inputs ``t_j`` and observations ``y_j`` is

    (1/n) sum_j sum_k w_k W2^2(N(mu_k(t_j), S_k(t_j)), N(y_j, eps I)) + lam |theta|^2

With an isotropic target the covariance part of ``W2^2`` is
``sum_i (sqrt(l_i) - sqrt(eps))^2`` over eigenvalues ``l_i`` of ``S_k(t_j)``,
whose gradient w.r.t. ``S`` is ``I - sqrt(eps) S^{-1/2}``.
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import softmax

from .bernstein import basis_eval
from .errors import ConfigError, DimMismatch, EmptyData, NumericalError
from .model import (
    DEFAULT_COMPONENTS,
    DEFAULT_DEGREE,
    DEFAULT_JITTER,
    flatten_params,
    init_model,
    with_params,
)
from .normalization import NormalizedInputs, normalize_inputs  # noqa: F401  (re-export)

logger = logging.getLogger(__name__)

# Eigenvalue gaps below this are counted in Diagnostics.near_degenerate.
DEGENERACY_GAP = 1e-10


@dataclass
class ModelConfig:
    degree: int = DEFAULT_DEGREE
    components: int = DEFAULT_COMPONENTS
    jitter: float = DEFAULT_JITTER


@dataclass
class TrainConfig:
    epochs: int = 2000
    batch_size: int = 32
    learning_rate: float = 5e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    l2_lambda: float = 1e-5
    target_eps: float = 1e-3
    seed: int = 0
    freeze_weights: bool = False
    l2_include_logits: bool = True

    def validate(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for name in ("learning_rate", "adam_eps", "target_eps"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be nonnegative")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")


@dataclass
class Diagnostics:
    near_degenerate: int = 0


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size), np.zeros(size), 0)


def _as_batch(batch):
    ts, ys = batch
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ys = np.asarray(ys, dtype=float)
    if ys.ndim == 1:
        ys = ys[None, :]
    if ys.shape[0] != ts.shape[0]:
        raise DimMismatch(f"{ts.shape[0]} inputs but {ys.shape[0]} targets")
    if ts.size == 0:
        raise EmptyData("empty batch")
    return ts, ys


def _objective(vec, layout, basis, ys, cfg, jitter, want_grad, diagnostics=None):
    """Risk (and optionally its gradient) at flat parameters ``vec``.

    ``basis`` holds precomputed Bernstein weights for the batch, shape (n, N+1).
    """
    k, c, d = layout.components, layout.n_controls, layout.dim
    s_mean, s_fact, s_logit = layout.slices()
    rows, cols = layout.tril_indices()
    n = basis.shape[0]

    ctrl_means = vec[s_mean].reshape(k, c, d)
    lower = np.zeros((k, c, d, d))
    lower[..., rows, cols] = vec[s_fact].reshape(k, c, -1)
    logits = vec[s_logit]
    w = softmax(logits)

    mu = np.einsum("ni,kid->nkd", basis, ctrl_means)
    outer = lower @ np.swapaxes(lower, -1, -2)
    sigma = np.einsum("ni,kide->nkde", basis, outer) + jitter * np.eye(d)
    lam, vecs = np.linalg.eigh(sigma)
    # jitter > 0 keeps lam >= jitter up to round-off.
    lam = np.maximum(lam, 0.5 * jitter)
    root = np.sqrt(lam)
    seps = np.sqrt(cfg.target_eps)

    resid = mu - ys[:, None, :]
    per_point = np.sum(resid * resid, axis=-1) + np.sum((root - seps) ** 2, axis=-1)
    comp_risk = per_point.mean(axis=0)  # (K,)
    l2_vec = vec if cfg.l2_include_logits else vec.copy()
    if not cfg.l2_include_logits:
        l2_vec[s_logit] = 0.0
    value = float(w @ comp_risk + cfg.l2_lambda * (l2_vec @ l2_vec))
    if not want_grad:
        return value, None

    if diagnostics is not None and d > 1:
        diagnostics.near_degenerate += int(np.sum(np.diff(lam, axis=-1) < DEGENERACY_GAP))

    grad = np.empty_like(vec)
    coef = w / n  # d(risk)/d(per_point[j, k])
    g_mu = 2.0 * resid * coef[None, :, None]
    grad[s_mean] = np.einsum("ni,nkd->kid", basis, g_mu).ravel()

    # d(per_point)/d(sigma) = I - sqrt(eps) sigma^{-1/2}
    scale = 1.0 - seps / root
    g_sigma = (vecs * scale[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    g_outer = np.einsum("ni,nkde->kide", basis, g_sigma * coef[None, :, None, None])
    # d/dL of <G, L L^T> with symmetric G is 2 G L.
    g_lower = 2.0 * g_outer @ lower
    grad[s_fact] = g_lower[..., rows, cols].ravel()

    # softmax Jacobian applied to the per-component risks
    grad[s_logit] = w * (comp_risk - w @ comp_risk)
    grad += 2.0 * cfg.l2_lambda * l2_vec
    if cfg.freeze_weights:
        grad[s_logit] = 0.0
    return value, grad


def loss(m, batch, cfg):
    """Empirical risk of model ``m`` on ``batch = (ts, ys)``; ``ts`` in [0, 1]."""
    ts, ys = _as_batch(batch)
    b = basis_eval(m.degree, ts)
    value, _ = _objective(flatten_params(m), m.layout, b, ys, cfg, m.jitter, want_grad=False)
    return value


def loss_grad(m, batch, cfg, diagnostics=None):
    """Gradient of :func:`loss` w.r.t. the flat parameter vector."""
    ts, ys = _as_batch(batch)
    b = basis_eval(m.degree, ts)
    _, grad = _objective(
        flatten_params(m), m.layout, b, ys, cfg, m.jitter, want_grad=True, diagnostics=diagnostics
    )
    return grad


def adam_step(state, params, grad, cfg):
    """One bias-corrected Adam update; returns ``(new_state, new_params)``."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if not (params.shape == grad.shape == state.m.shape == state.v.shape):
        raise DimMismatch("Adam state, parameters and gradient must have equal length")
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    step = state.step + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * grad * grad
    m_hat = m / (1.0 - b1**step)
    v_hat = v / (1.0 - b2**step)
    new_params = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return AdamState(m, v, step), new_params


def train(data, model_cfg=None, train_cfg=None, log_path=None, diagnostics=None):
    """Fit a mixture trajectory model to ``data`` with mini-batch Adam.

    Returns the final model and the per-epoch full-data risk. One seeded
    permutation is drawn per epoch; batches are contiguous slices of it.
    """
    model_cfg = model_cfg or ModelConfig()
    train_cfg = train_cfg or TrainConfig()
    train_cfg.validate()
    if len(data) == 0:
        raise EmptyData("cannot train on an empty dataset")

    init_seq, shuffle_seq = np.random.SeedSequence(train_cfg.seed).spawn(2)
    model = init_model(
        data,
        degree=model_cfg.degree,
        components=model_cfg.components,
        seed=init_seq,
        jitter=model_cfg.jitter,
        freeze_weights=train_cfg.freeze_weights,
        init_var=train_cfg.target_eps,
    )
    ts = model.to_t(data.xs)
    ys = data.ys
    basis = basis_eval(model.degree, ts)
    layout = model.layout
    params = flatten_params(model)
    state = AdamState.zeros(params.size)
    rng = np.random.default_rng(shuffle_seq)
    n = len(data)
    history = []

    log_fh = writer = None
    if log_path is not None:
        log_fh = Path(log_path).open("w", newline="")
        writer = csv.writer(log_fh, lineterminator="\n")
        writer.writerow(["epoch", "loss", "grad_norm", "wall_ms"])
    t0 = time.perf_counter()
    try:
        for epoch in range(train_cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, train_cfg.batch_size):
                idx = order[start : start + train_cfg.batch_size]
                _, grad = _objective(
                    params, layout, basis[idx], ys[idx], train_cfg, model.jitter, True, diagnostics
                )
                state, params = adam_step(state, params, grad, train_cfg)
            full, full_grad = _objective(params, layout, basis, ys, train_cfg, model.jitter, True)
            history.append(full)
            if writer is not None:
                wall_ms = (time.perf_counter() - t0) * 1e3
                writer.writerow(
                    [epoch + 1, repr(full), repr(float(np.linalg.norm(full_grad))), f"{wall_ms:.3f}"]
                )
            if not np.isfinite(full):
                raise NumericalError(f"loss became non-finite at epoch {epoch + 1}")
    finally:
        if log_fh is not None:
            log_fh.close()
    if history:
        logger.info("trained %d epochs, final loss %.6g", len(history), history[-1])
    return with_params(model, params), np.array(history)
