"""Minimal self-contained SVG output: line plots with axes and curve snapshots."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 50


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if 1e-3 <= abs(v) < 1e4:
        return f"{v:.4g}"
    return f"{v:.2e}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_plot(
    series: Sequence[tuple],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Render ``(x, y, label)`` triples as an SVG document string.

    Log axes drop non-positive values; the tick labels then show powers of ten.
    """
    prepared = []
    for x, y, label in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        x, y = x[ok], y[ok]
        if logx:
            x = np.log10(x)
        if logy:
            y = np.log10(y)
        prepared.append((x, y, label))
    xs = np.concatenate([p[0] for p in prepared]) if prepared else np.zeros(0)
    ys = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(0)
    if xs.size == 0:
        xs = ys = np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - ML - MR, H - MT - MB

    def px(v):
        return ML + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MT + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(x0, x1):
        X = px(v)
        lab = _fmt(10**v) if logx else _fmt(v)
        out.append(f'<line x1="{X:.1f}" y1="{MT + ph}" x2="{X:.1f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{MT + ph + 18}" text-anchor="middle">{lab}</text>')
    for v in _ticks(y0, y1):
        Y = py(v)
        lab = _fmt(10**v) if logy else _fmt(v)
        out.append(f'<line x1="{ML - 5}" y1="{Y:.1f}" x2="{ML}" y2="{Y:.1f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{Y + 4:.1f}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    out.append(f'<text x="{ML + pw / 2}" y="{H - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{MT + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MT + ph / 2})">{_esc(ylabel)}</text>'
    )
    for i, (x, y, label) in enumerate(prepared):
        col = _COLOURS[i % len(_COLOURS)]
        if x.size:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        ly = MT + 16 + 16 * i
        out.append(f'<line x1="{ML + 10}" y1="{ly - 4}" x2="{ML + 30}" y2="{ly - 4}" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{ML + 36}" y="{ly}">{_esc(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def curve_plot(curves: Sequence[tuple], title: str = "") -> str:
    """Closed polylines ``(points, label)`` on equal axes."""
    allp = np.concatenate([np.asarray(p, dtype=float) for p, _ in curves]) if curves else np.zeros((1, 2))
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    size = min(W - 2 * 30, H - MT - 30)
    cx, cy = (lo + hi) / 2

    def tr(p):
        X = W / 2 + (p[:, 0] - cx) / span * size
        Y = MT + size / 2 + 10 - (p[:, 1] - cy) / span * size
        return X, Y

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    for i, (p, label) in enumerate(curves):
        col = _COLOURS[i % len(_COLOURS)]
        X, Y = tr(np.asarray(p, dtype=float))
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(X, Y))
        out.append(f'<polygon points="{pts}" fill="none" stroke="{col}" stroke-width="1.2"/>')
        out.append(f'<text x="10" y="{MT + 16 * i}" fill="{col}">{_esc(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
