"""Self-contained SVG line/scatter rendering for CLI --svg output.

Deliberately tiny: no external renderer, just scaled polylines inside a
fixed viewport, enough to eyeball a series, its anomalies, or a
forecast next to its actuals.
"""
from __future__ import annotations

from typing import Sequence, TextIO

_WIDTH = 960
_HEIGHT = 320
_MARGIN = 45
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi != lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def render_lines(fh: TextIO, curves: Sequence[tuple[str, Sequence[float]]],
                 points: Sequence[tuple[int, float]] = (), title: str = "") -> None:
    """Plot one or more equal-x-spacing curves plus optional markers
    given as (x index, y value) pairs."""
    xs_max = max((len(c[1]) for c in curves), default=1) - 1
    ys = [v for _, vals in curves for v in vals] + [y for _, y in points]
    if not ys:
        ys = [0.0]
    y_lo, y_hi = min(ys), max(ys)
    fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
             f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">\n')
    fh.write(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>\n')
    if title:
        fh.write(f'<text x="{_WIDTH // 2}" y="18" text-anchor="middle" '
                 f'font-size="13" font-family="sans-serif">{title}</text>\n')
    fh.write(f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
             f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#999"/>\n')
    for text, y in ((f"{y_hi:g}", _MARGIN + 4), (f"{y_lo:g}", _HEIGHT - _MARGIN)):
        fh.write(f'<text x="{_MARGIN - 4}" y="{y}" text-anchor="end" '
                 f'font-size="10" font-family="sans-serif">{text}</text>\n')
    for ci, (label, vals) in enumerate(curves):
        if not len(vals):
            continue
        px = _scale(range(len(vals)), 0, max(xs_max, 1), _MARGIN, _WIDTH - _MARGIN)
        py = _scale(vals, y_lo, y_hi, _HEIGHT - _MARGIN, _MARGIN)
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        color = _COLORS[ci % len(_COLORS)]
        fh.write(f'<polyline points="{path}" fill="none" stroke="{color}" '
                 f'stroke-width="1.2"/>\n')
        fh.write(f'<text x="{_WIDTH - _MARGIN}" y="{_MARGIN + 14 * (ci + 1)}" '
                 f'text-anchor="end" font-size="11" font-family="sans-serif" '
                 f'fill="{color}">{label}</text>\n')
    for x, y in points:
        cx = _scale([x], 0, max(xs_max, 1), _MARGIN, _WIDTH - _MARGIN)[0]
        cy = _scale([y], y_lo, y_hi, _HEIGHT - _MARGIN, _MARGIN)[0]
        fh.write(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3.5" fill="none" '
                 f'stroke="#d62728" stroke-width="1.5"/>\n')
    fh.write("</svg>\n")
