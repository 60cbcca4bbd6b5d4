"""Minimal SVG step plots of slicing functions (presentation only)."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .analysis import SliceProfile
from .models import TWO_PI

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def chi_svg(profile: SliceProfile, width: int = 640, row: int = 90) -> str:
    """One step-function panel per band, t running over [0, 2pi)."""
    k = profile.k
    margin = 50
    height = row * k + 40
    vals = [v for c in profile.chi for v in c] or [0]
    top = max(1, max(abs(v) for v in vals))

    def xpos(t):
        return margin + (width - margin - 10) * (t % TWO_PI) / TWO_PI

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<text x="{margin}" y="14">{escape(profile.family)}: chi_i along axis {profile.axis}</text>']
    for i in range(k):
        y0 = 30 + i * row + row / 2

        def ypos(v):
            return y0 - (row / 2 - 8) * v / top

        color = _COLORS[i % len(_COLORS)]
        out.append(f'<line x1="{margin}" y1="{y0:.1f}" x2="{width - 10}" y2="{y0:.1f}" stroke="#bbb"/>')
        out.append(f'<text x="5" y="{y0 + 4:.1f}">chi_{i + 1}</text>')
        for (a, b), c in zip(profile.intervals, profile.chi):
            pieces = [(a, min(b, TWO_PI))] if b <= TWO_PI else [(a, TWO_PI), (0.0, b - TWO_PI)]
            for lo, hi in pieces:
                x1, x2 = xpos(lo), (width - 10 if hi >= TWO_PI else xpos(hi))
                y = ypos(c[i])
                out.append(f'<line x1="{x1:.1f}" y1="{y:.1f}" x2="{x2:.1f}" y2="{y:.1f}" '
                           f'stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{(x1 + x2) / 2:.1f}" y="{y - 4:.1f}" text-anchor="middle">{c[i]}</text>')
        for t in profile.critical_params:
            out.append(f'<line x1="{xpos(t):.1f}" y1="{y0 - row / 2 + 4:.1f}" x2="{xpos(t):.1f}" '
                       f'y2="{y0 + row / 2 - 4:.1f}" stroke="#888" stroke-dasharray="3,3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
