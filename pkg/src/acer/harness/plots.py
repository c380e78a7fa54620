"""Tiny dependency-free SVG line charts."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def line_chart(path, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 640, height: int = 400) -> None:
    """Write ``series`` (name -> (x, y)) as an SVG polyline chart."""
    ml, mr, mt, mb = 60, 20, 30, 45
    xs = [np.asarray(x, dtype=float) for x, _ in series.values()]
    ys = [np.asarray(y, dtype=float) for _, y in series.values()]
    finite = [v for v in xs + ys if v.size]
    if not finite:
        xs, ys = [np.zeros(1)], [np.zeros(1)]
    x0 = min(float(np.nanmin(x)) for x in xs if x.size)
    x1 = max(float(np.nanmax(x)) for x in xs if x.size)
    y0 = min(float(np.nanmin(y)) for y in ys if y.size)
    y1 = max(float(np.nanmax(y)) for y in ys if y.size)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{ml + pw / 2}" y="{height - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {mt + ph / 2})">{escape(ylabel)}</text>',
    ]
    for frac in np.linspace(0.0, 1.0, 5):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        parts.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle" '
                     f'font-size="10">{xv:.4g}</text>')
        parts.append(f'<text x="{ml - 4}" y="{sy(yv) + 3:.1f}" text-anchor="end" '
                     f'font-size="10">{yv:.3g}</text>')
    for k, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(np.asarray(x, float), np.asarray(y, float)))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = mt + 14 + 16 * k
        parts.append(f'<line x1="{ml + pw - 110}" y1="{ly}" x2="{ml + pw - 90}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{ml + pw - 86}" y="{ly + 4}" font-size="11">{escape(str(name))}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
