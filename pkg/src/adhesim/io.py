"""CSV tables and small self-contained SVG figures."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    """Twelve significant digits in scientific notation (always with a decimal point)."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.11e}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_profile(path, x, u) -> Path:
    return write_csv(path, ("x", "u"), zip(x, u))


def write_kymograph(path, times, fields) -> Path:
    M = np.asarray(fields).shape[1]
    header = ["t", *(f"x_{i}" for i in range(M))]
    return write_csv(path, header, ([t, *row] for t, row in zip(times, fields)))


def read_csv(path):
    """Header and float rows of a table written by ``write_csv``."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]]) if len(lines) > 1 else np.zeros((0, len(header)))
    return header, data


# -- SVG --------------------------------------------------------------------------------
_W, _H = 640, 420
_PAD = dict(left=70, right=20, top=30, bottom=50)


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def _frame(xlo, xhi, ylo, yhi, xlabel, ylabel, title, invert_y=False):
    pw = _W - _PAD["left"] - _PAD["right"]
    ph = _H - _PAD["top"] - _PAD["bottom"]

    def sx(v):
        return _PAD["left"] + (v - xlo) / (xhi - xlo or 1.0) * pw

    def sy(v):
        frac = (v - ylo) / (yhi - ylo or 1.0)
        return _PAD["top"] + (frac if invert_y else 1.0 - frac) * ph

    parts = [f'<rect x="{_PAD["left"]}" y="{_PAD["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(xlo, xhi):
        parts.append(f'<line x1="{sx(t):.2f}" y1="{_PAD["top"] + ph}" x2="{sx(t):.2f}" y2="{_PAD["top"] + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{sx(t):.2f}" y="{_PAD["top"] + ph + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        parts.append(f'<line x1="{_PAD["left"] - 5}" y1="{sy(t):.2f}" x2="{_PAD["left"]}" y2="{sy(t):.2f}" stroke="black"/>')
        parts.append(f'<text x="{_PAD["left"] - 8}" y="{sy(t) + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
    parts.append(f'<text x="{_PAD["left"] + pw / 2}" y="{_H - 10}" font-size="13" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_PAD["top"] + ph / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_PAD["top"] + ph / 2})">{ylabel}</text>')
    if title:
        parts.append(f'<text x="{_W / 2}" y="18" font-size="14" text-anchor="middle">{title}</text>')
    return parts, sx, sy, pw, ph


def _svg(parts) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(parts) + "\n</svg>\n")


def line_plot(path, series, xlabel="x", ylabel="u", title="") -> Path:
    """``series`` is a list of ``(x, y, label)``."""
    xs = np.concatenate([np.asarray(s[0], float) for s in series])
    ys = np.concatenate([np.asarray(s[1], float) for s in series])
    ylo, yhi = float(np.min(ys)), float(np.max(ys))
    if yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    parts, sx, sy, _, _ = _frame(float(xs.min()), float(xs.max()), ylo, yhi, xlabel, ylabel, title)
    colours = ("#1f4e9c", "#c0392b", "#27ae60", "#8e44ad", "#d35400")
    for k, (x, y, label) in enumerate(series):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        col = colours[k % len(colours)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        if label:
            parts.append(f'<text x="{_W - _PAD["right"] - 5}" y="{_PAD["top"] + 15 + 14 * k}" font-size="11" '
                         f'text-anchor="end" fill="{col}">{label}</text>')
    Path(path).write_text(_svg(parts))
    return Path(path)


def _colour(v):
    """Dark blue to yellow ramp on ``v`` in ``[0, 1]``."""
    v = min(1.0, max(0.0, v))
    r = int(255 * min(1.0, 1.6 * v))
    g = int(255 * v**0.8)
    b = int(255 * max(0.0, 0.55 - v))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, times, x, fields, title="", max_cells=160) -> Path:
    """Space-time raster with ``x`` horizontal and ``t`` increasing downwards."""
    fields = np.asarray(fields, float)
    times = np.asarray(times, float)
    x = np.asarray(x, float)
    col_step = max(1, int(math.ceil(fields.shape[1] / max_cells)))
    row_step = max(1, int(math.ceil(fields.shape[0] / max_cells)))
    data = fields[::row_step, ::col_step]
    tt = times[::row_step]
    lo, hi = float(data.min()), float(data.max())
    span = hi - lo or 1.0
    t_hi = float(tt[-1]) if tt[-1] > tt[0] else float(tt[0]) + 1.0
    parts, sx, sy, pw, ph = _frame(float(x[0]), float(x[-1]), float(tt[0]), t_hi, "x", "t", title,
                                   invert_y=True)
    cw = pw / data.shape[1]
    rh = ph / data.shape[0]
    cells = []
    for i in range(data.shape[0]):
        y0 = _PAD["top"] + i * rh
        for j in range(data.shape[1]):
            cells.append(f'<rect x="{_PAD["left"] + j * cw:.2f}" y="{y0:.2f}" width="{cw + 0.3:.2f}" '
                         f'height="{rh + 0.3:.2f}" fill="{_colour((data[i, j] - lo) / span)}"/>')
    parts = cells + parts
    parts.append(f'<text x="{_W - _PAD["right"]}" y="{_H - 10}" font-size="11" text-anchor="end">'
                 f'u in [{lo:.3g}, {hi:.3g}]</text>')
    Path(path).write_text(_svg(parts))
    return Path(path)
