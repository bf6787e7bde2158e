"""Min-max mapping of scalar inputs onto the curve parameter interval [0, 1]."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError, TooFewPoints


@dataclass(frozen=True)
class NormalizedInputs:
    ts: np.ndarray
    x_min: float
    x_max: float


def normalize_inputs(xs):
    """Map ``xs`` to ``(x - min) / (max - min)``."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size < 2:
        raise TooFewPoints(f"need at least 2 inputs to normalize, got {xs.size}")
    x_min, x_max = float(xs.min()), float(xs.max())
    if not x_max > x_min:
        raise DegenerateInput("all inputs are equal; normalization is undefined")
    return NormalizedInputs((xs - x_min) / (x_max - x_min), x_min, x_max)


def apply_normalization(xs, x_min, x_max, clip_tol=1e-12):
    """Map new inputs with a stored normalization.

    Values that fall outside ``[0, 1]`` by more than ``clip_tol`` raise
    :class:`DomainError`; the model is not defined off the training range.
    """
    ts = (np.asarray(xs, dtype=float) - x_min) / (x_max - x_min)
    if np.any(ts < -clip_tol) or np.any(ts > 1.0 + clip_tol):
        raise DomainError(f"inputs outside the fitted range [{x_min}, {x_max}]")
    return np.clip(ts, 0.0, 1.0)
