"""Dependency-free SVG figures: data scatter, component mean curves and 1-sigma ellipses."""

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH = HEIGHT = 480
MARGIN = 30
CURVE_POINTS = 240
COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
PROJECTIONS_3D = ((0, 1, "xy"), (0, 2, "xz"), (1, 2, "yz"))


def _f(v):
    return f"{v:.3f}"


class _Frame:
    """Maps data coordinates onto the canvas with equal axis scaling, y up."""

    def __init__(self, points):
        lo, hi = points.min(axis=0), points.max(axis=0)
        span = max(float(np.max(hi - lo)), 1e-12)
        self.scale = (WIDTH - 2 * MARGIN) / span
        self.center = 0.5 * (lo + hi)

    def __call__(self, x, y):
        px = WIDTH / 2 + (x - self.center[0]) * self.scale
        py = HEIGHT / 2 - (y - self.center[1]) * self.scale
        return px, py


def _ellipse(frame, mean, cov, color):
    lam, vec = np.linalg.eigh(0.5 * (cov + cov.T))
    lam = np.maximum(lam, 0.0)
    rx, ry = math.sqrt(lam[1]) * frame.scale, math.sqrt(lam[0]) * frame.scale
    # Canvas y points down, so the rotation flips sign.
    angle = -math.degrees(math.atan2(vec[1, 1], vec[0, 1]))
    cx, cy = frame(mean[0], mean[1])
    return (
        f'<ellipse cx="{_f(cx)}" cy="{_f(cy)}" rx="{_f(rx)}" ry="{_f(ry)}" '
        f'transform="rotate({_f(angle)} {_f(cx)} {_f(cy)})" fill="none" '
        f'stroke="{color}" stroke-opacity="0.35" stroke-width="0.6"/>'
    )


def svg_projection(ys, model, ts, axes=(0, 1), title=""):
    """SVG text for one 2-D view of data ``ys`` and the model's predictions.

    One ``<path>`` per mixture component traces its mean curve over
    ``[0, 1]``; an ellipse per data input shows each component's 1-sigma
    covariance projected onto ``axes``.
    """
    a, b = axes
    grid = np.linspace(0.0, 1.0, CURVE_POINTS)
    curve = model.predict(grid)
    at_data = model.predict(ts)
    k = curve.means.shape[1]
    pts = np.vstack([ys[:, [a, b]], curve.means[:, :, [a, b]].reshape(-1, 2)])
    frame = _Frame(pts)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN - 10}" font-family="sans-serif" font-size="12">{escape(title)}</text>')
    out.append('<g fill="#555555" fill-opacity="0.6">')
    for y in ys:
        px, py = frame(y[a], y[b])
        out.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="1.5"/>')
    out.append("</g>")
    idx = np.ix_([a, b], [a, b])
    for c in range(k):
        color = COLORS[c % len(COLORS)]
        for i in range(ts.size):
            out.append(_ellipse(frame, at_data.means[i, c, [a, b]], at_data.covs[i, c][idx], color))
        coords = [frame(p[a], p[b]) for p in curve.means[:, c]]
        d = "M " + " L ".join(f"{_f(x)} {_f(y)}" for x, y in coords)
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_views(ys, model, ts, title=""):
    """``{suffix: svg}``: one view for 2-D data, xy/xz/yz projections for 3-D."""
    d = ys.shape[1]
    if d == 2:
        return {"": svg_projection(ys, model, ts, (0, 1), title)}
    if d == 3:
        return {
            name: svg_projection(ys, model, ts, (a, b), f"{title} ({name})".strip())
            for a, b, name in PROJECTIONS_3D
        }
    raise ValueError(f"plots support 2-D or 3-D data, got d={d}")
