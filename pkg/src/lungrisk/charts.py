"""Deterministic SVG charts: correlation heatmap, bar chart, labelled scatter.

Coordinates are written with fixed precision so identical inputs give
identical bytes.
"""

from __future__ import annotations

from typing import Callable, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1b1b1b", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"]


def _f(x: float) -> str:
    return f"{x:.2f}"


def _text(x, y, s, size=11, anchor="start", extra="") -> str:
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}"'
            f'{extra}>{escape(str(s))}</text>')


def _open(width: float, height: float, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}" font-family="sans-serif">',
        f"<title>{escape(title)}</title>",
        _text(width / 2, 20, title, size=14, anchor="middle"),
    ]


def diverging_color(v: float) -> str:
    """Blue (-1) through white (0) to red (+1)."""
    v = max(-1.0, min(1.0, float(v)))
    if v >= 0:
        r, g, b = 255, round(255 * (1 - v)), round(255 * (1 - v))
    else:
        r, g, b = round(255 * (1 + v)), round(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(labels: Sequence[str], M, title: str = "Correlation heatmap",
                cell: int = 34, decimals: int = 2) -> str:
    M = np.asarray(M, dtype=float)
    k = len(labels)
    margin = 8 + 7 * max((len(s) for s in labels), default=0)
    top = 40
    width = margin + k * cell + 20
    height = top + k * cell + margin
    out = _open(width, height, title)
    for i, lab in enumerate(labels):
        y = top + i * cell + cell / 2 + 4
        out.append(_text(margin - 6, y, lab, size=10, anchor="end"))
        x = margin + i * cell + cell / 2
        yb = top + k * cell + 6
        out.append(_text(x, yb, lab, size=10, anchor="end",
                         extra=f' transform="rotate(-60 {_f(x)} {_f(yb)})"'))
    for i in range(k):
        for j in range(k):
            v = M[i, j]
            x = margin + j * cell
            y = top + i * cell
            out.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{cell}" height="{cell}" '
                       f'fill="{diverging_color(v)}"/>')
            out.append(_text(x + cell / 2, y + cell / 2 + 3, f"{v:.{decimals}f}", size=8,
                             anchor="middle",
                             extra=f' data-row="{escape(labels[i])}" data-col="{escape(labels[j])}"'))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart_svg(categories: Sequence[str], values: Sequence[float], title: str = "",
                  decimals: int = 4, bar: int = 18) -> str:
    """Horizontal bars in the given order, each labelled with its value."""
    values = [float(v) for v in values]
    label_w = 8 + 7 * max((len(c) for c in categories), default=0)
    plot_w = 360
    top = 40
    width = label_w + plot_w + 80
    height = top + len(categories) * (bar + 6) + 20
    out = _open(width, height, title)
    lo = min([0.0, *values])
    hi = max([0.0, *values])
    span = (hi - lo) or 1.0

    def sx(v: float) -> float:
        return label_w + (v - lo) / span * plot_w

    zero = sx(0.0)
    for i, (cat, v) in enumerate(zip(categories, values)):
        y = top + i * (bar + 6)
        x0, x1 = sorted((zero, sx(v)))
        out.append(_text(label_w - 6, y + bar - 5, cat, size=11, anchor="end"))
        out.append(f'<rect x="{_f(x0)}" y="{_f(y)}" width="{_f(x1 - x0)}" height="{bar}" '
                   f'fill="{"#1f77b4" if v >= 0 else "#d62728"}"/>')
        out.append(_text(max(x1, zero) + 4, y + bar - 5, f"{v:.{decimals}f}", size=10,
                         extra=f' data-category="{escape(cat)}"'))
    out.append(f'<line x1="{_f(zero)}" y1="{top - 4}" x2="{_f(zero)}" y2="{_f(height - 16)}" '
               'stroke="#444"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_svg(points, labels: Sequence[int], title: str = "",
                axis_names: tuple[str, str] = ("PC1", "PC2"),
                classify: Callable[[np.ndarray], np.ndarray] | None = None,
                legend: dict[int, str] | None = None, size: int = 420, grid: int = 60) -> str:
    """2-D scatter coloured by label; ``classify`` shades the predicted regions."""
    P = np.asarray(points, dtype=float)
    labels = [int(v) for v in labels]
    pad = 50
    width = height = size + 2 * pad
    out = _open(width, height, title)
    lo = P.min(axis=0) if P.size else np.zeros(2)
    hi = P.max(axis=0) if P.size else np.ones(2)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    lo = lo - 0.05 * span
    span = span * 1.1

    def sx(v):
        return pad + (v - lo[0]) / span[0] * size

    def sy(v):
        return pad + size - (v - lo[1]) / span[1] * size

    codes = sorted(set(labels) | (set(legend) if legend else set()))
    color = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(codes)}
    if classify is not None and P.size:
        step = span / grid
        xs = lo[0] + (np.arange(grid) + 0.5) * step[0]
        ys = lo[1] + (np.arange(grid) + 0.5) * step[1]
        gx, gy = np.meshgrid(xs, ys)
        pred = np.asarray(classify(np.column_stack([gx.ravel(), gy.ravel()]))).reshape(gx.shape)
        cw = size / grid
        for r in range(grid):
            for c in range(grid):
                code = int(pred[r, c])
                fill = color.setdefault(code, PALETTE[len(color) % len(PALETTE)])
                out.append(f'<rect x="{_f(pad + c * cw)}" y="{_f(pad + size - (r + 1) * cw)}" '
                           f'width="{_f(cw)}" height="{_f(cw)}" fill="{fill}" fill-opacity="0.15"/>')
    out.append(f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#444"/>')
    for (x, y), code in zip(P, labels):
        out.append(f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="2.5" fill="{color[code]}"/>')
    out.append(_text(pad + size / 2, height - 12, axis_names[0], anchor="middle"))
    out.append(_text(14, pad + size / 2, axis_names[1], anchor="middle",
                     extra=f' transform="rotate(-90 14 {_f(pad + size / 2)})"'))
    for i, code in enumerate(codes):
        name = legend.get(code, str(code)) if legend else str(code)
        y = pad + 12 + i * 16
        out.append(f'<circle cx="{_f(pad + size - 80)}" cy="{_f(y - 4)}" r="4" fill="{color[code]}"/>')
        out.append(_text(pad + size - 70, y, name, size=11))
    out.append("</svg>")
    return "\n".join(out) + "\n"
