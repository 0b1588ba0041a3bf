"""Minimal deterministic SVG scatter plots.

Hand-rolled rather than using a plotting library so that report artifacts
are byte-stable across runs and machines: fixed coordinate formatting, no
timestamps, no generated element ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Point = tuple[float, float]

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64.0, 20.0, 42.0, 52.0


@dataclass(frozen=True)
class Series:
    name: str
    points: tuple[Point, ...]
    color: str = "#4878d0"
    radius: float = 3.5


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _bounds(all_points: Sequence[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in all_points] or [0.0]
    ys = [p[1] for p in all_points] or [0.0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x0 == x1:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y0 == y1:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad_x, pad_y = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
    return x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y


def scatter_svg(
    series: Sequence[Series],
    *,
    title: str,
    x_label: str,
    y_label: str,
    width: int = 640,
    height: int = 480,
    polylines: Sequence[Sequence[Point]] = (),
    meta: str = "",
) -> str:
    all_points = [p for s in series for p in s.points]
    for line in polylines:
        all_points.extend(line)
    x0, x1, y0, y1 = _bounds(all_points)
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x0) / (x1 - x0) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + (y1 - y) / (y1 - y0) * plot_h

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    if meta:
        out.append(f"<!-- {meta} -->")
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    out.append(
        f'<text x="{_fmt(width / 2)}" y="24" text-anchor="middle" font-size="15">'
        f"{_escape(title)}</text>"
    )
    # Axes box and ticks.
    out.append(
        f'<rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#888" stroke-width="1"/>'
    )
    for i in range(5):
        fx = x0 + i * (x1 - x0) / 4
        px = sx(fx)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_T + plot_h)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(_MARGIN_T + plot_h + 5)}" stroke="#888"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{_fmt(_MARGIN_T + plot_h + 18)}" '
            f'text-anchor="middle" font-size="11">{fx:.3g}</text>'
        )
        fy = y0 + i * (y1 - y0) / 4
        py = sy(fy)
        out.append(
            f'<line x1="{_fmt(_MARGIN_L - 5)}" y1="{_fmt(py)}" x2="{_fmt(_MARGIN_L)}" '
            f'y2="{_fmt(py)}" stroke="#888"/>'
        )
        out.append(
            f'<text x="{_fmt(_MARGIN_L - 8)}" y="{_fmt(py + 4)}" '
            f'text-anchor="end" font-size="11">{fy:.3g}</text>'
        )
    out.append(
        f'<text x="{_fmt(_MARGIN_L + plot_w / 2)}" y="{_fmt(height - 14.0)}" '
        f'text-anchor="middle" font-size="12">{_escape(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{_fmt(_MARGIN_T + plot_h / 2)}" text-anchor="middle" '
        f'font-size="12" transform="rotate(-90 16 {_fmt(_MARGIN_T + plot_h / 2)})">'
        f"{_escape(y_label)}</text>"
    )
    for line in polylines:
        if len(line) < 2:
            continue
        path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in line)
        out.append(
            f'<polyline points="{path}" fill="none" stroke="#333" '
            f'stroke-width="1.5" stroke-dasharray="5,3"/>'
        )
    for s in series:
        for x, y in s.points:
            out.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="{_fmt(s.radius)}" '
                f'fill="{s.color}" fill-opacity="0.85"/>'
            )
    # Legend, top-right inside the plot box.
    ly = _MARGIN_T + 14.0
    for s in series:
        if not s.points:
            continue
        lx = _MARGIN_L + plot_w - 150.0
        out.append(
            f'<circle cx="{_fmt(lx)}" cy="{_fmt(ly - 4)}" r="4.00" fill="{s.color}"/>'
        )
        out.append(
            f'<text x="{_fmt(lx + 10)}" y="{_fmt(ly)}" font-size="11">{_escape(s.name)}</text>'
        )
        ly += 16.0
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
