"""Tiny dependency-free SVG plots: enough for visual regression of runs.

Line/scatter plots with linear or log axes and grayscale heatmaps.  Output
is deterministic (no timestamps or random ids).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

_WIDTH, _HEIGHT = 640, 440
_MARGIN = 56
_COLORS = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b7950b", "#34495e")


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        step = max(1, (hi_e - lo_e) // 6)
        return [10.0**e for e in range(lo_e, hi_e + 1, step)]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 6
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


class _Axes:
    def __init__(self, xlim, ylim, logx, logy):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = (math.log10(xlim[0]), math.log10(xlim[1])) if logx else xlim
        self.y0, self.y1 = (math.log10(ylim[0]), math.log10(ylim[1])) if logy else ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1

    def px(self, x):
        v = math.log10(x) if self.logx else x
        return _MARGIN + (v - self.x0) / (self.x1 - self.x0) * (_WIDTH - 2 * _MARGIN)

    def py(self, y):
        v = math.log10(y) if self.logy else y
        return _HEIGHT - _MARGIN - (v - self.y0) / (self.y1 - self.y0) * (_HEIGHT - 2 * _MARGIN)


def svg_plot(path, series, xlabel="", ylabel="", title="", logx=False,
             logy=False, styles=None) -> Path:
    """Write a line/scatter plot.

    series: list of (x, y, label, kind) with kind "line" or "scatter";
    log-scaled axes drop non-positive points.
    """
    cleaned = []
    for x, y, label, kind in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        cleaned.append((x[keep], y[keep], label, kind))
    xs = np.concatenate([c[0] for c in cleaned if c[0].size]) if cleaned else np.array([0.0, 1.0])
    ys = np.concatenate([c[1] for c in cleaned if c[1].size]) if cleaned else np.array([0.0, 1.0])
    if xs.size == 0:
        xs = np.array([0.0, 1.0])
        ys = np.array([0.0, 1.0])
    axes = _Axes((xs.min(), xs.max()), (ys.min(), ys.max()), logx, logy)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2*_MARGIN}" '
        f'height="{_HEIGHT - 2*_MARGIN}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH/2:.1f}" y="20" text-anchor="middle">{title}</text>')
    for tx in _ticks(xs.min(), xs.max(), logx):
        px = axes.px(tx)
        if _MARGIN - 1 <= px <= _WIDTH - _MARGIN + 1:
            parts.append(f'<line x1="{px:.1f}" y1="{_HEIGHT-_MARGIN}" x2="{px:.1f}" '
                         f'y2="{_HEIGHT-_MARGIN+5}" stroke="black"/>')
            parts.append(f'<text x="{px:.1f}" y="{_HEIGHT-_MARGIN+18}" '
                         f'text-anchor="middle">{_fmt_tick(tx)}</text>')
    for ty in _ticks(ys.min(), ys.max(), logy):
        py = axes.py(ty)
        if _MARGIN - 1 <= py <= _HEIGHT - _MARGIN + 1:
            parts.append(f'<line x1="{_MARGIN-5}" y1="{py:.1f}" x2="{_MARGIN}" '
                         f'y2="{py:.1f}" stroke="black"/>')
            parts.append(f'<text x="{_MARGIN-8}" y="{py+4:.1f}" '
                         f'text-anchor="end">{_fmt_tick(ty)}</text>')
    if xlabel:
        parts.append(f'<text x="{_WIDTH/2:.1f}" y="{_HEIGHT-10}" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{_HEIGHT/2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 16 {_HEIGHT/2:.1f})">{ylabel}</text>')
    for i, (x, y, label, kind) in enumerate(cleaned):
        color = _COLORS[i % len(_COLORS)]
        if kind == "line" and x.size > 1:
            pts = " ".join(f"{axes.px(a):.1f},{axes.py(b):.1f}" for a, b in zip(x, y))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        else:
            for a, b in zip(x, y):
                parts.append(f'<circle cx="{axes.px(a):.1f}" cy="{axes.py(b):.1f}" '
                             f'r="1.8" fill="{color}"/>')
        if label:
            ly = _MARGIN + 16 + 16 * i
            parts.append(f'<rect x="{_WIDTH-_MARGIN-150}" y="{ly-9}" width="12" '
                         f'height="4" fill="{color}"/>')
            parts.append(f'<text x="{_WIDTH-_MARGIN-132}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    return _write(path, parts)


def svg_heatmap(path, values, x_centers, y_centers, xlabel="", ylabel="",
                title="") -> Path:
    """Grayscale raster: dark cells carry high values."""
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    vmax = values.max() if values.max() > 0 else 1.0
    cw = (_WIDTH - 2 * _MARGIN) / nx
    ch = (_HEIGHT - 2 * _MARGIN) / ny
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH/2:.1f}" y="20" text-anchor="middle">{title}</text>')
    for i in range(ny):
        row = values[i]
        y = _HEIGHT - _MARGIN - (i + 1) * ch
        for j in range(nx):
            level = int(255 * (1.0 - min(1.0, row[j] / vmax)))
            if level >= 255:
                continue
            parts.append(
                f'<rect x="{_MARGIN + j*cw:.1f}" y="{y:.1f}" width="{cw+0.5:.1f}" '
                f'height="{ch+0.5:.1f}" fill="rgb({level},{level},{level})"/>')
    parts.append(f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH-2*_MARGIN}" '
                 f'height="{_HEIGHT-2*_MARGIN}" fill="none" stroke="black"/>')
    x0, x1 = float(np.min(x_centers)), float(np.max(x_centers))
    y0, y1 = float(np.min(y_centers)), float(np.max(y_centers))
    parts.append(f'<text x="{_MARGIN}" y="{_HEIGHT-_MARGIN+18}">{_fmt_tick(x0)}</text>')
    parts.append(f'<text x="{_WIDTH-_MARGIN}" y="{_HEIGHT-_MARGIN+18}" '
                 f'text-anchor="end">{_fmt_tick(x1)}</text>')
    parts.append(f'<text x="{_MARGIN-8}" y="{_HEIGHT-_MARGIN}" text-anchor="end">{_fmt_tick(y0)}</text>')
    parts.append(f'<text x="{_MARGIN-8}" y="{_MARGIN+6}" text-anchor="end">{_fmt_tick(y1)}</text>')
    if xlabel:
        parts.append(f'<text x="{_WIDTH/2:.1f}" y="{_HEIGHT-10}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{_HEIGHT/2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 16 {_HEIGHT/2:.1f})">{ylabel}</text>')
    parts.append("</svg>")
    return _write(path, parts)


def _write(path, parts) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
    return path
