"""Minimal deterministic SVG line charts; no plotting dependency."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_WIDTH, _HEIGHT = 640, 400
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 36, 48
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def write_line_chart_svg(
    series: list[tuple[str, list[tuple[float, float]]]],
    title: str,
    xlabel: str,
    ylabel: str,
    log_y: bool = False,
) -> str:
    """Render labelled (x, y) polylines to an SVG document string."""
    pts = [(x, y) for _, data in series for x, y in data]
    if not pts:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    else:
        xs = [p[0] for p in pts]
        ys = [math.log10(p[1]) if log_y else p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    inner_w = _WIDTH - _MARGIN_L - _MARGIN_R
    inner_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * inner_w

    def py(y: float) -> float:
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]
    axis = (
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>'
        f'<line x1="{_MARGIN_L}" y1="{_HEIGHT - _MARGIN_B}" '
        f'x2="{_WIDTH - _MARGIN_R}" y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>'
    )
    parts.append(axis)
    for tx in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{_fmt(px(tx))}" y="{_HEIGHT - _MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f"{escape(_fmt(tx))}</text>"
        )
    for ty in _ticks(y_lo, y_hi):
        label = f"1e{_fmt(ty)}" if log_y else _fmt(ty)
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{_fmt(py(ty) + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{escape(label)}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_HEIGHT // 2})">{escape(ylabel)}</text>'
    )
    for idx, (label, data) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(
            f"{_fmt(px(x))},{_fmt(py(math.log10(y) if log_y else y))}" for x, y in data
        )
        if coords:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        ly = _MARGIN_T + 14 * idx + 10
        parts.append(
            f'<rect x="{_WIDTH - _MARGIN_R - 150}" y="{ly - 8}" width="10" height="10" '
            f'fill="{color}"/>'
            f'<text x="{_WIDTH - _MARGIN_R - 136}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
