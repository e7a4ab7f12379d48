"""Minimal static SVG line chart for theta sweeps."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 24, 24, 56
Y_MAX = 1.05

# line styles follow the usual convention: D solid, V dotted, D^2+V^2 dashed
SERIES = (
    ("D", "none"),
    ("V", "2,4"),
    ("D2V2", "9,5"),
)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def sweep_svg(rows: Sequence) -> str:
    thetas = [r.theta / math.pi for r in rows]
    values = {
        "D": [r.D for r in rows],
        "V": [r.V for r in rows],
        "D2V2": [r.sum_sq for r in rows],
    }
    x0, x1 = thetas[0], thetas[-1]
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(t):
        return MARGIN_L + (t - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + (1.0 - v / Y_MAX) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{_fmt(sy(0))}" x2="{MARGIN_L + pw}" y2="{_fmt(sy(0))}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{_fmt(sy(0))}" x2="{MARGIN_L}" y2="{MARGIN_T}" stroke="black"/>',
    ]
    for k in range(5):
        t = x0 + (x1 - x0) * k / 4
        out.append(
            f'<text x="{_fmt(sx(t))}" y="{_fmt(sy(0) + 18)}" font-size="12" '
            f'text-anchor="middle">{t:.3g}</text>'
        )
    for k in range(6):
        v = 0.2 * k
        out.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(sy(v) + 4)}" font-size="12" '
            f'text-anchor="end">{v:.1f}</text>'
        )
    out.append(
        f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 12}" font-size="14" '
        f'text-anchor="middle">{escape("θ/π")}</text>'
    )
    for name, dash in SERIES:
        pts = " ".join(f"{_fmt(sx(t))},{_fmt(sy(v))}" for t, v in zip(thetas, values[name]))
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        out.append(
            f'<polyline id="{name}" fill="none" stroke="black" stroke-width="1.5"'
            f'{dash_attr} points="{pts}"/>'
        )
    for k, (name, dash) in enumerate(SERIES):
        label = {"D": "D", "V": "V", "D2V2": "D²+V²"}[name]
        y = MARGIN_T + 16 + 16 * k
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        out.append(
            f'<line x1="{MARGIN_L + pw - 120}" y1="{y - 4}" x2="{MARGIN_L + pw - 88}" '
            f'y2="{y - 4}" stroke="black" stroke-width="1.5"{dash_attr}/>'
        )
        out.append(
            f'<text x="{MARGIN_L + pw - 80}" y="{y}" font-size="12">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
