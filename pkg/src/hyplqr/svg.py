"""Minimal native SVG emitter: line plots and diverging heatmaps.

Good enough to eyeball profile shapes, decay envelopes and kernel structure
without pulling in a plotting runtime. Output is deterministic.
"""

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["line_plot", "heatmap"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 60, 20, 30, 45
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s for s in (mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step / 2, step)


def _fmt(v):
    return format(float(v), ".6g")


def line_plot(path, x, ys, labels=None, title="", xlabel="", ylabel=""):
    """Write a multi-series line plot; ys is a list of arrays matching x."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for y in ys]
    if any(len(y) != len(x) for y in ys):
        raise InvalidArgumentError("series length mismatch")
    labels = labels or [f"series {i + 1}" for i in range(len(ys))]
    xlo, xhi = float(x.min()), float(x.max())
    ylo = min(float(y.min()) for y in ys)
    yhi = max(float(y.max()) for y in ys)
    if yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + pw * (v - xlo) / (xhi - xlo) if xhi > xlo else _ML

    def sy(v):
        return _MT + ph * (1.0 - (v - ylo) / (yhi - ylo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for tv in _ticks(xlo, xhi):
        px = sx(tv)
        parts.append(f'<line x1="{px:.1f}" y1="{_MT + ph}" x2="{px:.1f}" y2="{_MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{_MT + ph + 18}" text-anchor="middle">{_fmt(tv)}</text>')
    for tv in _ticks(ylo, yhi):
        py = sy(tv)
        parts.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end">{_fmt(tv)}</text>')
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    for i, y in enumerate(ys):
        pts = " ".join(f"{sx(xv):.2f},{sy(yv):.2f}" for xv, yv in zip(x, y))
        col = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{_ML + 10}" y="{_MT + 16 + 14 * i}" fill="{col}">{labels[i]}</text>'
        )
    parts.append(f'<text x="{_W / 2}" y="{_H - 8}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="14" y="{_H / 2}" text-anchor="middle" transform="rotate(-90 14 {_H / 2})">{ylabel}</text>'
    )
    parts.append("</svg>")
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write("\n".join(parts))
    return path


def _diverging_color(v):
    """Map v in [-1, 1] to a blue-white-red ramp."""
    v = float(np.clip(v, -1.0, 1.0))
    if v < 0:
        r, g, b = 1.0 + v, 1.0 + v, 1.0
    else:
        r, g, b = 1.0, 1.0 - v, 1.0 - v
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def heatmap(path, Z, extent=None, title=""):
    """Write a cell-per-entry heatmap of a 2-D array, symmetric color scale."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if not np.all(np.isfinite(Z)):
        raise InvalidArgumentError("heatmap data must be finite")
    vmax = float(np.abs(Z).max()) or 1.0
    rows, cols = Z.shape
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    cw, ch = pw / cols, ph / rows
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for i in range(rows):
        y = _MT + ph - (i + 1) * ch  # row 0 at the bottom, matching axis order
        row = []
        for j in range(cols):
            col = _diverging_color(Z[i, j] / vmax)
            row.append(
                f'<rect x="{_ML + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                f'height="{ch + 0.5:.2f}" fill="{col}"/>'
            )
        parts.append("".join(row))
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    lo, hi = (0.0, 1.0) if extent is None else (float(extent[0]), float(extent[1]))
    parts.append(f'<text x="{_ML}" y="{_H - 8}">{_fmt(lo)}</text>')
    parts.append(f'<text x="{_ML + pw}" y="{_H - 8}" text-anchor="end">{_fmt(hi)}</text>')
    parts.append(f'<text x="{_W - 4}" y="{_MT + 12}" text-anchor="end">max |v| = {_fmt(vmax)}</text>')
    parts.append("</svg>")
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write("\n".join(parts))
    return path
