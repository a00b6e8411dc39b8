"""Minimal hand-written SVG line and scatter plots.

Output is deterministic text (fixed coordinate precision) so figures hash
the same across reruns.
"""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

W, H, PAD = 480, 360, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _range(values):
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def svg_plot(path, series, title="", xlabel="", ylabel="", lines=True, diagonal=False):
    """Write ``series`` (a list of ``(label, xs, ys)``) as an SVG file.

    Non-finite points are dropped. ``diagonal`` draws ``y = x`` (useful for
    Q-Q and ROC plots).
    """
    clean = []
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        clean.append((label, pts))
    allpts = [p for _, pts in clean for p in pts] or [(0.0, 0.0)]
    x0, x1 = _range([p[0] for p in allpts])
    y0, y1 = _range([p[1] for p in allpts])

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def sy(y):
        return H - PAD - (y - y0) / (y1 - y0) * (H - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" fill="none" stroke="black"/>',
           f'<text x="{W / 2}" y="{PAD / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
           f'<text x="15" y="{H / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 15 {H / 2})">{escape(ylabel)}</text>',
           f'<text x="{PAD}" y="{H - PAD + 15}" font-size="10">{x0:.4g}</text>',
           f'<text x="{W - PAD}" y="{H - PAD + 15}" text-anchor="end" font-size="10">{x1:.4g}</text>',
           f'<text x="{PAD - 5}" y="{H - PAD}" text-anchor="end" font-size="10">{y0:.4g}</text>',
           f'<text x="{PAD - 5}" y="{PAD + 10}" text-anchor="end" font-size="10">{y1:.4g}</text>']
    if diagonal:
        a, b = max(x0, y0), min(x1, y1)
        if a < b:
            out.append(f'<line x1="{sx(a):.2f}" y1="{sy(a):.2f}" x2="{sx(b):.2f}" y2="{sy(b):.2f}" '
                       'stroke="gray" stroke-dasharray="4 3"/>')
    for n, (label, pts) in enumerate(clean):
        color = COLORS[n % len(COLORS)]
        if lines and len(pts) > 1:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        else:
            out.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2" fill="{color}"/>' for x, y in pts)
        out.append(f'<text x="{W - PAD - 5}" y="{PAD + 15 * (n + 1)}" text-anchor="end" '
                   f'font-size="10" fill="{color}">{escape(str(label))}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
