"""
Seeded synthetic trajectory datasets and their CSV persistence.

Every family is a closed-form curve over a parameter ``s`` in ``[0, 1]``;
generated inputs are ``x = s`` on an even grid and outputs are the curve
plus isotropic Gaussian noise.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyData, ParseError


@dataclass
class Dataset:
    xs: np.ndarray  # (n,)
    ys: np.ndarray  # (n, d)
    name: str = "dataset"
    noise_sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float).ravel()
        self.ys = np.asarray(self.ys, dtype=float)
        if self.ys.ndim == 1:
            self.ys = self.ys[:, None]
        if self.ys.shape[0] != self.xs.shape[0]:
            raise ConfigError(f"{self.xs.shape[0]} inputs but {self.ys.shape[0]} outputs")

    def __len__(self):
        return self.xs.shape[0]

    @property
    def dim(self):
        return self.ys.shape[1]


def spiral(s, r0=0.2, growth=0.8, turns=2.0):
    r = r0 + growth * s
    phi = 2.0 * math.pi * turns * s
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def ellipse(s, a=1.0, b=0.5):
    phi = 2.0 * math.pi * s
    return np.column_stack([a * np.cos(phi), b * np.sin(phi)])


def figure_eight(s):
    # Gerono lemniscate; crosses itself at the origin for s = 0, 0.5, 1.
    phi = 2.0 * math.pi * s
    return np.column_stack([np.sin(phi), np.sin(phi) * np.cos(phi)])


def lissajous(s, a=3, b=2, delta=math.pi / 2):
    phi = 2.0 * math.pi * s
    return np.column_stack([np.sin(a * phi + delta), np.sin(b * phi)])


def torus_knot(s, p=2, q=3, major=1.0, minor=0.35):
    phi = 2.0 * math.pi * s
    ring = major + minor * np.cos(q * phi)
    return np.column_stack([ring * np.cos(p * phi), ring * np.sin(p * phi), minor * np.sin(q * phi)])


FAMILIES = {
    "spiral": spiral,
    "ellipse": ellipse,
    "figure_eight": figure_eight,
    "lissajous": lissajous,
    "torus_knot": torus_knot,
}


@dataclass
class GeneratorSpec:
    family: str
    n_points: int = 400
    noise_sigma: float = 0.03
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(
                f"unknown family {self.family!r}; valid families: {', '.join(FAMILIES)}"
            )
        if self.n_points < 2:
            raise ConfigError("n_points must be at least 2")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be nonnegative")


def clean_curve(family, s, **params):
    """Noise-free curve of ``family`` at parameters ``s``."""
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; valid families: {', '.join(FAMILIES)}")
    return FAMILIES[family](np.asarray(s, dtype=float), **params)


def generate(spec):
    """Draw a dataset from ``spec``; identical specs give identical data."""
    spec.validate()
    xs = np.linspace(0.0, 1.0, spec.n_points)
    ys = clean_curve(spec.family, xs, **spec.params)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        ys = ys + spec.noise_sigma * rng.standard_normal(ys.shape)
    return Dataset(xs, ys, name=spec.family, noise_sigma=spec.noise_sigma, seed=spec.seed)


def _fmt(v):
    return format(float(v), ".17g")


def save_csv(ds, path):
    """Write ``x,y1,...,yd`` rows at 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x"] + [f"y{j + 1}" for j in range(ds.dim)])
        for x, y in zip(ds.xs, ds.ys):
            writer.writerow([_fmt(x)] + [_fmt(v) for v in y])


def load_csv(path, name=None):
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyData(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "x":
        raise ParseError("header must be x,y1,...,yd", line=1)
    width = len(header)
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} columns, got {len(row)}", line=lineno)
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    if not values:
        raise EmptyData(f"{path}: no data rows")
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        bad = int(np.argwhere(~np.isfinite(arr))[0, 0])
        raise ParseError("non-finite value", line=bad + 2)
    return Dataset(arr[:, 0], arr[:, 1:], name=name or path.stem)
