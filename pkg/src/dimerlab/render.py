"""SVG drawing of a dimer model over a window of fundamental domains.

Node positions come from a periodic barycentric embedding: every node sits
at the average of its (translated) neighbours, one node pinned to fix the
translation.  Zigzag paths are drawn through edge midpoints, colored by the
direction of their homology class.
"""

from __future__ import annotations

import colorsys
import math

import numpy as np

from .core import BLACK, DimerModel
from .zigzag import trace_zigzags


def embed(m: DimerModel) -> dict[str, np.ndarray]:
    """Periodic barycentric positions in lattice coordinates (unit square cell)."""
    ids = sorted(m.nodes)
    index = {v: k for k, v in enumerate(ids)}
    n = len(ids)
    rows = []
    rhs = []
    for v in ids:
        row = np.zeros(n)
        target = np.zeros(2)
        for eid in m.rotations[v]:
            e = m.edges[eid]
            other = e.white if v == e.black else e.black
            shift = np.array(e.offset, dtype=float) * (1 if v == e.black else -1)
            row[index[v]] += 1
            row[index[other]] -= 1
            target += shift
        rows.append(row)
        rhs.append(target)
    pin = np.zeros(n)
    pin[0] = 1
    rows.append(pin * n)
    rhs.append(np.array([0.25, 0.25]) * n)
    a = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return {v: sol[index[v]] for v in ids}


def _slope_color(h) -> str:
    if h == (0, 0):
        return "#888888"
    hue = (math.atan2(h[1], h[0]) / (2 * math.pi)) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.75, 0.85)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def render_svg(m: DimerModel, window: int = 1, size: int = 480, zigzags: bool = True) -> str:
    """SVG text of a ``window`` by ``window`` block of fundamental domains."""
    if window < 1:
        raise ValueError("window must be at least 1")
    pos = embed(m)
    scale = size / window
    margin = 20

    def xy(p):
        return (margin + p[0] * scale, margin + (window - p[1]) * scale)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * margin}" '
        f'height="{size + 2 * margin}" viewBox="0 0 {size + 2 * margin} {size + 2 * margin}">',
        f'<title>{m.name or "dimer model"}</title>',
    ]
    for i in range(window + 1):
        x0, y0 = xy((i, 0))
        x1, y1 = xy((i, window))
        out.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="#dddddd"/>')
        x0, y0 = xy((0, i))
        x1, y1 = xy((window, i))
        out.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="#dddddd"/>')

    cells = [(i, j) for i in range(window) for j in range(window)]
    for i, j in cells:
        for eid in sorted(m.edges):
            e = m.edges[eid]
            p = pos[e.black] + (i, j)
            q = pos[e.white] + np.array(e.offset) + (i, j)
            (x0, y0), (x1, y1) = xy(p), xy(q)
            out.append(
                f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="#222222" stroke-width="1.5"/>'
            )
    if zigzags:
        for z in trace_zigzags(m):
            color = _slope_color(z.homology)
            pts = []
            for k in range(z.period + 1):
                eid, black = z.lifted_edge(k)
                e = m.edges[eid]
                mid = (pos[e.black] + pos[e.white] + np.array(e.offset)) / 2 + np.array(black)
                pts.append(mid)
            for i, j in cells:
                coords = " ".join("{:.2f},{:.2f}".format(*xy(p + (i, j))) for p in pts)
                out.append(
                    f'<polyline points="{coords}" fill="none" stroke="{color}" '
                    f'stroke-width="2" stroke-opacity="0.7"><title>zigzag {z.index} {z.homology}</title></polyline>'
                )
    for i, j in cells:
        for v in sorted(m.nodes):
            x, y = xy(pos[v] + (i, j))
            fill = "#000000" if m.nodes[v] == BLACK else "#ffffff"
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{fill}" stroke="#000000"><title>{v}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
