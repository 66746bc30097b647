"""Tiny SVG writer for sampled error curves and surfaces."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, PAD = 480, 360, 40


def _scale(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    span = float(values.max() - values.min()) or 1.0
    return lo + (values - values.min()) / span * (hi - lo)


def _frame(body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    label = f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>'
    return "\n".join([head, label, *body, "</svg>"]) + "\n"


def line_plot(rows: Sequence[tuple[float, float]], title: str = "e(x)") -> str:
    data = np.asarray(rows, dtype=float)
    xs = _scale(data[:, 0], PAD, WIDTH - PAD)
    ys = _scale(data[:, 1], HEIGHT - PAD, PAD)
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    k = int(np.argmin(data[:, 1]))
    body = [
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" fill="none" stroke="#999"/>',
        f'<polyline points="{points}" fill="none" stroke="#1f4e99" stroke-width="1.5"/>',
        f'<circle cx="{xs[k]:.2f}" cy="{ys[k]:.2f}" r="3" fill="#c0392b"/>',
        f'<text x="{PAD}" y="{HEIGHT - 12}" font-size="11">x: [{data[0, 0]:.4g}, {data[-1, 0]:.4g}]'
        f"  min e = {data[k, 1]:.4g} at x = {data[k, 0]:.4g}</text>",
    ]
    return _frame(body, title)


def heat_map(rows: Sequence[tuple[float, float, float]], title: str = "e(x, y)") -> str:
    """Filled grid cells shaded by log(1 + e - min e); darker is lower."""
    data = np.asarray(rows, dtype=float)
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    cw = (WIDTH - 2 * PAD) / len(xs)
    ch = (HEIGHT - 2 * PAD) / len(ys)
    shade = np.log1p(data[:, 2] - data[:, 2].min())
    shade = shade / (shade.max() or 1.0)
    body = []
    for (x, y, _), s in zip(data, shade):
        i = int(np.searchsorted(xs, x))
        j = int(np.searchsorted(ys, y))
        g = int(40 + 215 * s)
        body.append(
            f'<rect x="{PAD + i * cw:.2f}" y="{HEIGHT - PAD - (j + 1) * ch:.2f}" '
            f'width="{cw + 0.3:.2f}" height="{ch + 0.3:.2f}" fill="rgb({g},{g},255)"/>'
        )
    k = int(np.argmin(data[:, 2]))
    body.append(
        f'<text x="{PAD}" y="{HEIGHT - 12}" font-size="11">min e = {data[k, 2]:.4g} at '
        f"({data[k, 0]:.4g}, {data[k, 1]:.4g})</text>"
    )
    return _frame(body, title)
