"""Minimal line charts written directly as SVG."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
MARGIN = 0.05


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    secondary: bool = False
    dashed: bool = False


def padded_range(values: Sequence[float], margin: float = MARGIN) -> tuple[float, float]:
    """Data range widened by ``margin`` of its span on each side."""
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        raise ValueError("no finite values to plot")
    lo, hi = min(vals), max(vals)
    span = hi - lo
    if span == 0:
        span = abs(lo) or 1.0
        return lo - margin * span, hi + margin * span
    return lo - margin * span, hi + margin * span


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10))
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(series: Sequence[Series], title: str, xlabel: str, ylabel: str,
               y2label: str | None = None, width: int = 720, height: int = 440) -> str:
    if not series:
        raise ValueError("need at least one series")
    left, right, top, bottom = 70, 70 if y2label else 20, 40, 60
    pw, ph = width - left - right, height - top - bottom
    xr = padded_range([x for s in series for x in s.x])
    prim = [s for s in series if not s.secondary]
    sec = [s for s in series if s.secondary]
    yr = padded_range([y for s in prim for y in s.y]) if prim else (0.0, 1.0)
    y2r = padded_range([y for s in sec for y in s.y]) if sec else None

    def sx(x):
        return left + (x - xr[0]) / (xr[1] - xr[0]) * pw

    def sy(y, rng):
        return top + ph - (y - rng[0]) / (rng[1] - rng[0]) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(*xr):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(*yr):
        y = sy(t, yr)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    if y2r is not None:
        for t in _ticks(*y2r):
            y = sy(t, y2r)
            out.append(f'<line x1="{left + pw}" y1="{y:.2f}" x2="{left + pw + 5}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{left + pw + 8}" y="{y + 4:.2f}">{_fmt(t)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(18,{top + ph / 2}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    if y2label:
        out.append(f'<text transform="translate({width - 15},{top + ph / 2}) rotate(90)" '
                   f'text-anchor="middle">{escape(y2label)}</text>')

    for k, s in enumerate(series):
        color = COLORS[k % len(COLORS)]
        rng = y2r if s.secondary else yr
        pts = [(sx(x), sy(y, rng)) for x, y in zip(s.x, s.y) if math.isfinite(y)]
        dash = ' stroke-dasharray="6,4"' if s.dashed or s.secondary else ""
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"{dash}>'
                   f'<title>{escape(s.label)}</title></polyline>')
        for x, y in pts:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{left + 10}" y1="{ly - 4}" x2="{left + 34}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + 40}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_chart(table, xlabel: str) -> str:
    """Average AoI and PAoI (left axis) with capture probability (right axis)."""
    x = table.column("value")
    return line_chart(
        [
            Series("average AoI", x, table.column("aoi_avg")),
            Series("average PAoI", x, table.column("paoi_avg")),
            Series("capture probability", x, table.column("coverage"), secondary=True),
        ],
        title=f"Freshness versus {xlabel}",
        xlabel=xlabel,
        ylabel="age [s]",
        y2label="capture probability",
    )


def coverage_chart(latitudes: Sequence[float], curves: dict[str, Sequence[float]]) -> str:
    return line_chart(
        [Series(label, latitudes, y) for label, y in curves.items()],
        title="Capture availability versus latitude",
        xlabel="latitude [deg]",
        ylabel="availability",
    )
