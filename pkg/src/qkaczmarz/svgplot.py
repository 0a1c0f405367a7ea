"""Minimal deterministic SVG line plots.

The experiment harness needs convergence plots whose bytes are a pure
function of the data (regenerating an experiment must reproduce the figure
exactly, diffable in review).  General plotting libraries embed timestamps,
library versions, and object ids in their SVG output, so this module draws
the few primitives needed here by hand: linear x axis, linear or log10 y
axis, solid/dashed polylines in a fixed palette, legend, title.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyCurves

# Default categorical palette (matplotlib's tab10 hex values).
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

WIDTH = 900
HEIGHT = 560
MARGIN_LEFT = 80
MARGIN_RIGHT = 185
MARGIN_TOP = 50
MARGIN_BOTTOM = 60


@dataclass(frozen=True)
class CurveSeries:
    """One labeled polyline; ``dashed`` switches the stroke pattern."""

    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise DomainError("curve x and y must be 1-d arrays of equal length")
        if len(x) == 0:
            raise DomainError("curve must contain at least one point")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _thin(x: np.ndarray, y: np.ndarray, max_points: int) -> tuple[np.ndarray, np.ndarray]:
    if len(x) <= max_points:
        return x, y
    stride = int(math.ceil(len(x) / max_points))
    idx = np.arange(0, len(x), stride)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    return x[idx], y[idx]


def emit_svg(
    curves: list[CurveSeries],
    path: "str | Path",
    title: str,
    x_label: str,
    y_label: str,
    log_y: bool = True,
    y_floor: float = 1e-16,
    max_points: int = 2000,
) -> None:
    """Render the curves to ``path``.

    On a log axis, y values below ``y_floor`` are clamped to it (errors can
    underflow to zero, which has no logarithm).  Curves are thinned to at
    most ``max_points`` vertices by deterministic striding that always keeps
    the final point.
    """
    if not curves:
        raise EmptyCurves("nothing to plot")
    if y_floor <= 0.0:
        raise DomainError("y_floor must be positive")

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x0, y0 = MARGIN_LEFT, MARGIN_TOP

    xs = np.concatenate([c.x for c in curves])
    ys = np.concatenate([c.y for c in curves])
    finite = np.isfinite(xs)
    if not finite.any():
        raise DomainError("no finite x values to plot")
    x_lo, x_hi = float(xs[finite].min()), float(xs[finite].max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    ys = ys[np.isfinite(ys)]
    if len(ys) == 0:
        raise DomainError("no finite y values to plot")
    if log_y:
        clipped = np.maximum(ys, y_floor)
        dec_lo = math.floor(math.log10(clipped.min()))
        dec_hi = math.ceil(math.log10(clipped.max()))
        if dec_hi <= dec_lo:
            dec_hi = dec_lo + 1
        y_lo, y_hi = float(dec_lo), float(dec_hi)
    else:
        y_lo, y_hi = float(ys.min()), float(ys.max())
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        pad = 0.05 * (y_hi - y_lo)
        y_lo -= pad
        y_hi += pad

    def px(v: float) -> float:
        return x0 + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        if log_y:
            t = math.log10(max(v, y_floor))
        else:
            t = v
        return y0 + plot_h - (t - y_lo) / (y_hi - y_lo) * plot_h

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    out.append(
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>'
    )

    # Frame.
    out.append(
        f'<rect x="{x0}" y="{y0}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )

    # X ticks.
    for t in _nice_ticks(x_lo, x_hi):
        tx = px(t)
        out.append(
            f'<line x1="{tx:.2f}" y1="{y0 + plot_h}" x2="{tx:.2f}" '
            f'y2="{y0 + plot_h + 5}" stroke="#000000" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{tx:.2f}" y="{y0 + plot_h + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )

    # Y ticks: one per decade on log scale (labels thinned when crowded).
    if log_y:
        decades = range(int(y_lo), int(y_hi) + 1)
        label_every = max(1, math.ceil(len(list(decades)) / 10))
        for i, d in enumerate(range(int(y_lo), int(y_hi) + 1)):
            ty = py(10.0**d)
            out.append(
                f'<line x1="{x0 - 5}" y1="{ty:.2f}" x2="{x0}" y2="{ty:.2f}" '
                f'stroke="#000000" stroke-width="1"/>'
            )
            out.append(
                f'<line x1="{x0}" y1="{ty:.2f}" x2="{x0 + plot_w}" y2="{ty:.2f}" '
                f'stroke="#dddddd" stroke-width="0.5"/>'
            )
            if i % label_every == 0:
                out.append(
                    f'<text x="{x0 - 8}" y="{ty + 4:.2f}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="11">1e{d}</text>'
                )
    else:
        for t in _nice_ticks(y_lo, y_hi):
            ty = py(t)
            out.append(
                f'<line x1="{x0 - 5}" y1="{ty:.2f}" x2="{x0}" y2="{ty:.2f}" '
                f'stroke="#000000" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{x0 - 8}" y="{ty + 4:.2f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{t:g}</text>'
            )

    # Axis labels.
    out.append(
        f'<text x="{x0 + plot_w / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{_escape(x_label)}</text>'
    )
    out.append(
        f'<text x="20" y="{y0 + plot_h / 2:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {y0 + plot_h / 2:.2f})">{_escape(y_label)}</text>'
    )

    # Curves and legend.
    legend_x = x0 + plot_w + 15
    legend_y = y0 + 10
    for i, curve in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="6,4"' if curve.dashed else ""
        cx, cy = _thin(curve.x, curve.y, max_points)
        keep = np.isfinite(cx) & np.isfinite(cy)
        pts = " ".join(
            f"{px(float(a)):.2f},{py(float(b)):.2f}"
            for a, b in zip(cx[keep], cy[keep])
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash}/>'
        )
        ly = legend_y + 18 * i
        out.append(
            f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 24}" y2="{ly}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        out.append(
            f'<text x="{legend_x + 30}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{_escape(curve.label)}</text>'
        )

    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
