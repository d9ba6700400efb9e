"""A very small SVG writer for line and scatter plots."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    style: str = "line"  # "line" or one of the markers "circle", "cross"
    dashed: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render(series, title="", xlabel="", ylabel="", width=480, height=400, equal_aspect=False) -> str:
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    ys = np.concatenate([np.asarray(s.y, float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    margin = 50
    pw, ph = width - 2 * margin, height - 2 * margin
    sx, sy = pw / (x1 - x0), ph / (y1 - y0)
    if equal_aspect:
        sx = sy = min(sx, sy)

    def px(x):
        return margin + (x - x0) * sx

    def py(y):
        return height - margin - (y - y0) * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{width / 2}" y="25" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {height / 2})">{escape(ylabel)}</text>',
        f'<text x="{margin}" y="{height - margin + 15}" font-size="10">{x0:.3g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 15}" text-anchor="end" font-size="10">{x1:.3g}</text>',
        f'<text x="{margin - 5}" y="{height - margin}" text-anchor="end" font-size="10">{y0:.3g}</text>',
        f'<text x="{margin - 5}" y="{margin + 10}" text-anchor="end" font-size="10">{y1:.3g}</text>',
    ]
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        x, y = np.asarray(s.x, float), np.asarray(s.y, float)
        if s.style == "line":
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        elif s.style == "circle":
            out.extend(
                f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="3" fill="none" stroke="{color}"/>'
                for a, b in zip(x, y)
            )
        else:
            for a, b in zip(x, y):
                cx, cy = px(a), py(b)
                out.append(
                    f'<path d="M{_fmt(cx - 3)},{_fmt(cy - 3)}L{_fmt(cx + 3)},{_fmt(cy + 3)}'
                    f'M{_fmt(cx - 3)},{_fmt(cy + 3)}L{_fmt(cx + 3)},{_fmt(cy - 3)}" stroke="{color}"/>'
                )
        if s.label:
            ly = margin + 15 + 15 * i
            out.append(
                f'<text x="{width - margin - 5}" y="{ly}" text-anchor="end" font-size="11" '
                f'fill="{color}">{escape(s.label)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save(path, series, **kw) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(series, **kw))
