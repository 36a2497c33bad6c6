"""Minimal static SVG line plots (no plotting dependency)."""

from __future__ import annotations

from html import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H = 640, 400
_PAD_L, _PAD_R, _PAD_T, _PAD_B = 64, 16, 32, 48
_MAX_POINTS = 4000


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + 0.5 * step, step) if lo - 1e-12 <= v <= hi + 1e-12]


def line_plot(x, series: dict[str, np.ndarray], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Render ``series`` (label -> y values over ``x``) as an SVG document string."""
    x = np.asarray(x, dtype=float)
    stride = max(1, x.size // _MAX_POINTS)
    xs = x[::stride]
    ys = {k: np.asarray(v, dtype=float)[::stride] for k, v in series.items()}
    x0, x1 = float(xs.min()), float(xs.max())
    allv = np.concatenate(list(ys.values())) if ys else np.zeros(1)
    y0, y1 = float(allv.min()), float(allv.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    pw, ph = _W - _PAD_L - _PAD_R, _H - _PAD_T - _PAD_B

    def px(v):
        return _PAD_L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return _PAD_T + (1 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{_PAD_L}" y="{_PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x0, x1):
        out.append(f'<text x="{px(tx):.2f}" y="{_H - _PAD_B + 16}" font-size="11" text-anchor="middle">{tx:.4g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<text x="{_PAD_L - 6}" y="{py(ty) + 4:.2f}" font-size="11" text-anchor="end">{ty:.4g}</text>')
    for k, (label, yv) in enumerate(ys.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, yv))
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{_W - _PAD_R - 4}" y="{_PAD_T + 14 + 14 * k}" font-size="11" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append(f'<text x="{_W / 2}" y="20" font-size="13" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{_PAD_L + pw / 2}" y="{_H - 10}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{_PAD_T + ph / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {_PAD_T + ph / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
