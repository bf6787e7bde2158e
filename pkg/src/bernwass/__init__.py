"""Wasserstein regression over Gaussian-mixture trajectories with Bernstein-curve parameters."""

__version__ = "0.1.0"

from .datasets import Dataset, GeneratorSpec, generate, load_csv, save_csv
from .metrics import MetricsReport, evaluate
from .model import MixtureModel, init_model, load_model, save_model
from .training import ModelConfig, TrainConfig, train

__all__ = [
    "Dataset",
    "GeneratorSpec",
    "MetricsReport",
    "MixtureModel",
    "ModelConfig",
    "TrainConfig",
    "evaluate",
    "generate",
    "init_model",
    "load_csv",
    "load_model",
    "save_csv",
    "save_model",
    "train",
]
