"""Minimal deterministic SVG line plots for learning curves.

Hand-rolled rather than delegated to a plotting library so identical
inputs always produce identical bytes (no embedded ids or timestamps).
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 58, 16, 34, 42

PALETTE = ("#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#d62728", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def line_plot_svg(
    title: str,
    series: dict[str, Sequence[float]],
    y_label: str,
    x_label: str = "episode",
    y_range: tuple[float, float] | None = None,
) -> str:
    """One SVG document: each series drawn as a polyline with a legend."""
    lo, hi = y_range if y_range is not None else _auto_range(series)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    n = max((len(v) for v in series.values()), default=0)

    def sx(i: int) -> float:
        return MARGIN_L + (plot_w * i / max(n - 1, 1))

    def sy(v: float) -> float:
        frac = (v - lo) / (hi - lo) if hi > lo else 0.5
        return MARGIN_T + plot_h * (1.0 - frac)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="15">{title}</text>',
    ]
    # axes and gridlines
    x0, y0 = MARGIN_L, MARGIN_T + plot_h
    parts.append(
        f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>'
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>'
    )
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = sy(v)
        parts.append(
            f'<line x1="{x0}" y1="{y:.1f}" x2="{x0 + plot_w}" y2="{y:.1f}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
            f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{_fmt(v)}</text>'
        )
    for i in range(0, n, max(1, (n - 1) // 8 or 1)):
        parts.append(
            f'<text x="{sx(i):.1f}" y="{y0 + 16}" text-anchor="middle" font-size="11">{i + 1}</text>'
        )
    parts.append(
        f'<text x="{x0 + plot_w / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle" '
        f'font-size="12">{x_label}</text>'
        f'<text x="14" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {MARGIN_T + plot_h / 2:.1f})">{y_label}</text>'
    )
    # series
    for idx, (label, values) in enumerate(sorted(series.items())):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(f"{sx(i):.1f},{sy(v):.1f}" for i, v in enumerate(values))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{points}"/>'
        )
        ly = MARGIN_T + 14 + 16 * idx
        lx = x0 + plot_w - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.6"/>'
            f'<text x="{lx + 28}" y="{ly}" font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _auto_range(series: dict[str, Sequence[float]]) -> tuple[float, float]:
    values = [v for vals in series.values() for v in vals]
    if not values:
        return (0.0, 1.0)
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def write_svg(path: Path, svg: str) -> None:
    Path(path).write_text(svg)
