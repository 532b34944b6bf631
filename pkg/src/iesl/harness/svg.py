"""Minimal static SVG line charts (log-scale y) for learning curves."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT, MARGIN = 640, 400, 60


def line_chart(series: dict[str, tuple[list[float], list[float]]], title: str = "", y_label: str = "NashConv") -> str:
    """Render ``{label: (xs, ys)}``; nonpositive or non-finite y values are skipped."""
    points = {
        label: [(x, math.log10(y)) for x, y in zip(xs, ys) if math.isfinite(y) and y > 0]
        for label, (xs, ys) in series.items()
    }
    all_pts = [p for pts in points.values() for p in pts]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    if all_pts:
        x_lo, x_hi = min(p[0] for p in all_pts), max(p[0] for p in all_pts)
        y_lo, y_hi = math.floor(min(p[1] for p in all_pts)), math.ceil(max(p[1] for p in all_pts))
        if x_hi == x_lo:
            x_hi = x_lo + 1
        if y_hi == y_lo:
            y_hi = y_lo + 1

        def sx(x):
            return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

        def sy(y):
            return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

        out.append(
            f'<polyline fill="none" stroke="black" points="{MARGIN},{MARGIN} {MARGIN},{HEIGHT - MARGIN} {WIDTH - MARGIN},{HEIGHT - MARGIN}"/>'
        )
        for e in range(y_lo, y_hi + 1):
            out.append(f'<text x="{MARGIN - 6}" y="{sy(e) + 4:.1f}" text-anchor="end">1e{e}</text>')
        out.append(f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_lo:g}</text>')
        out.append(f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_hi:g}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">iteration</text>')
        out.append(f'<text x="15" y="{HEIGHT / 2}" transform="rotate(-90 15 {HEIGHT / 2})" text-anchor="middle">{escape(y_label)}</text>')
        for i, (label, pts) in enumerate(points.items()):
            color = PALETTE[i % len(PALETTE)]
            if pts:
                coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
            out.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * i}" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path: str | Path, series, title: str = "", y_label: str = "NashConv") -> None:
    Path(path).write_text(line_chart(series, title, y_label))
