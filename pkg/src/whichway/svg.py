"""Minimal self-contained SVG line plots."""
from __future__ import annotations

import numpy as np

_W, _H = 640, 400
_M = dict(left=60, right=20, top=20, bottom=50)


def _scale(v, lo, hi, a, b):
    return a + (v - lo) / (hi - lo) * (b - a)


def line_plot(series, xlim, ylim, xlabel="x", ylabel="", title=""):
    """Render curves as an SVG document.

    ``series`` is a list of dicts with keys ``x``, ``y`` and optional
    ``label``, ``color``, ``dash`` and ``points`` (draw markers instead of a
    line).  Values outside ``ylim`` are clipped.
    """
    x0, x1 = _M["left"], _W - _M["right"]
    y0, y1 = _H - _M["bottom"], _M["top"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>',
    ]
    for t in np.linspace(ylim[0], ylim[1], 5):
        ty = _scale(t, *ylim, y0, y1)
        out.append(f'<text x="{x0 - 6}" y="{ty + 4:.1f}" font-size="11" text-anchor="end">{t:.3g}</text>')
    for t in np.linspace(xlim[0], xlim[1], 5):
        tx = _scale(t, *xlim, x0, x1)
        out.append(f'<text x="{tx:.1f}" y="{y0 + 16}" font-size="11" text-anchor="middle">{t:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 12}" font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(
            f'<text x="16" y="{(y0 + y1) / 2:.1f}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{ylabel}</text>'
        )
    if title:
        out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="14" font-size="13" text-anchor="middle">{title}</text>')
    for k, s in enumerate(series):
        x = np.asarray(s["x"], dtype=float)
        y = np.clip(np.nan_to_num(np.asarray(s["y"], dtype=float), nan=ylim[0], posinf=ylim[1]), *ylim)
        px = _scale(x, *xlim, x0, x1)
        py = _scale(y, *ylim, y0, y1)
        color = s.get("color", "black")
        if s.get("points"):
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill="{color}"/>' for a, b in zip(px, py))
        else:
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
            dash = f' stroke-dasharray="{s["dash"]}"' if s.get("dash") else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        if s.get("label"):
            ly = y1 + 16 + 16 * k
            out.append(f'<line x1="{x1 - 150}" y1="{ly - 4}" x2="{x1 - 126}" y2="{ly - 4}" stroke="{color}"/>')
            out.append(f'<text x="{x1 - 120}" y="{ly}" font-size="11">{s["label"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
