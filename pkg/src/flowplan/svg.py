"""Deterministic SVG 1.1 rendering of scenes, paths, and partitions.

Elements are emitted in a fixed order with explicit attribute strings, so
the same inputs always produce byte-identical files. 3D scenes are drawn
in an isometric projection; everything else is flat 2D with y up.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import FlowScene
from .partition import FlowGrid

_PALETTE = ("#4878cf", "#ee854a", "#6acc65", "#d65f5f", "#956cb4",
            "#8c613c", "#dc7ec0", "#797979", "#d5bb67", "#82c6e2")


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


class Canvas:
    """Collects SVG elements over a world-coordinate viewport (y up)."""

    def __init__(self, xmin, ymin, xmax, ymax, width=640, margin=0.05):
        span_x = xmax - xmin
        span_y = ymax - ymin
        pad = margin * max(span_x, span_y)
        self.xmin, self.ymin = xmin - pad, ymin - pad
        self.span_x, self.span_y = span_x + 2 * pad, span_y + 2 * pad
        self.width = width
        self.height = width * self.span_y / self.span_x
        self.scale = width / self.span_x
        self.elements: list[str] = []

    def to_px(self, p) -> tuple[float, float]:
        # SVG y grows downward
        return ((p[0] - self.xmin) * self.scale,
                (self.ymin + self.span_y - p[1]) * self.scale)

    def polyline(self, pts, stroke="#000000", width=1.5, dash=None, fill="none"):
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.to_px(p) for p in pts))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<polyline points="{d}" fill="{fill}" stroke="{stroke}"'
            f' stroke-width="{_fmt(width)}"{dash_attr} />'
        )

    def polygon(self, pts, fill="none", stroke="#000000", width=1.0, opacity=None):
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.to_px(p) for p in pts))
        op = f' fill-opacity="{_fmt(opacity)}"' if opacity is not None else ""
        self.elements.append(
            f'<polygon points="{d}" fill="{fill}" stroke="{stroke}"'
            f' stroke-width="{_fmt(width)}"{op} />'
        )

    def line(self, p, q, stroke="#000000", width=1.0):
        (x1, y1), (x2, y2) = self.to_px(p), self.to_px(q)
        self.elements.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"'
            f' stroke="{stroke}" stroke-width="{_fmt(width)}" />'
        )

    def circle(self, p, r_px=4.0, fill="#000000", stroke="none"):
        x, y = self.to_px(p)
        self.elements.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r_px)}"'
            f' fill="{fill}" stroke="{stroke}" />'
        )

    def rect_cell(self, center, w, h, fill):
        x, y = self.to_px((center[0] - w / 2.0, center[1] + h / 2.0))
        self.elements.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w * self.scale)}"'
            f' height="{_fmt(h * self.scale)}" fill="{fill}" stroke="none" />'
        )

    def text(self, p, s, size_px=12, fill="#333333"):
        x, y = self.to_px(p)
        self.elements.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{_fmt(size_px)}"'
            f' font-family="sans-serif" fill="{fill}">{s}</text>'
        )

    def arrow(self, p, vec, stroke="#5588cc", width=1.0, head=0.18):
        p = np.asarray(p, dtype=float)
        v = np.asarray(vec, dtype=float)
        n = np.linalg.norm(v)
        if n <= 0.0:
            return
        q = p + v
        self.line(p, q, stroke=stroke, width=width)
        back = v / n * min(head, 0.4 * n)
        side = np.array([-back[1], back[0]]) * 0.5
        self.polygon([q, q - back + side, q - back - side], fill=stroke, stroke="none")

    def render(self) -> str:
        w, h = _fmt(self.width), _fmt(self.height)
        body = "\n".join(f"  {e}" for e in self.elements)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
            f'  <rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff" />\n'
            f"{body}\n</svg>\n"
        )


def _iso(p) -> tuple[float, float]:
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    c, s = math.cos(math.radians(30.0)), math.sin(math.radians(30.0))
    return ((x - y) * c, (x + y) * s + z)


def _region_edges_3d(vertices) -> list:
    """Edge list of a convex polytope: vertex pairs sharing two face planes."""
    from .geometry import _halfspaces_3d

    A, b = _halfspaces_3d(vertices)
    on = np.abs(A @ np.asarray(vertices, dtype=float).T - b[:, None]) < 1e-7
    edges = []
    n = len(vertices)
    for i in range(n):
        for j in range(i + 1, n):
            if np.count_nonzero(on[:, i] & on[:, j]) >= 2:
                edges.append((i, j))
    return edges


def scene_svg(scene: FlowScene, path=None, junctions=None,
              start=None, goal=None, arrows_per_axis: int = 8,
              width: int = 640) -> str:
    """Scene rendering: region fills/outlines, flow arrows, path, markers."""
    if scene.dimension == 3:
        return _scene_svg_3d(scene, path, junctions, start, goal, width)
    (xmin, ymin), (xmax, ymax) = scene.domain
    cv = Canvas(xmin, ymin, xmax, ymax, width=width)
    for idx, r in enumerate(scene.regions):
        cv.polygon(r.vertices, fill=_PALETTE[idx % len(_PALETTE)], stroke="none", opacity=0.15)
    # flow arrows on a lattice, clipped to the owning region
    xs = np.linspace(xmin, xmax, arrows_per_axis + 2)[1:-1]
    ys = np.linspace(ymin, ymax, arrows_per_axis + 2)[1:-1]
    arrow_scale = 0.35 * min((xmax - xmin), (ymax - ymin)) / arrows_per_axis
    vmax = max((float(np.linalg.norm(r.flow)) for r in scene.regions), default=1.0)
    vmax = vmax if vmax > 0 else 1.0
    for x in xs:
        for y in ys:
            for r in scene.regions:
                if r.contains((x, y)):
                    u = r.flow
                    if np.linalg.norm(u) > 0:
                        cv.arrow((x, y), np.asarray(u) * arrow_scale / vmax)
                    break
    for idx, b in enumerate(scene.boundaries):
        cv.line(b.p1, b.p2, stroke=_PALETTE[idx % len(_PALETTE)], width=2.5)
    for idx, r in enumerate(scene.regions):
        cv.text(r.interior_point(), str(r.id), size_px=13)
    if path is not None:
        cv.polyline(path, stroke="#000000", width=2.0)
    if junctions is not None:
        for p in junctions:
            cv.circle(p, r_px=4.5, fill="#000000")
    if start is not None:
        cv.circle(start, r_px=5.0, fill="#d62728")
    if goal is not None:
        cv.circle(goal, r_px=5.0, fill="#2ca02c")
    return cv.render()


def _scene_svg_3d(scene, path, junctions, start, goal, width) -> str:
    mins, maxs = scene.domain
    corners = [_iso((x, y, z)) for x in (mins[0], maxs[0])
               for y in (mins[1], maxs[1]) for z in (mins[2], maxs[2])]
    us = [c[0] for c in corners]
    vs = [c[1] for c in corners]
    cv = Canvas(min(us), min(vs), max(us), max(vs), width=width)
    for idx, r in enumerate(scene.regions):
        color = _PALETTE[idx % len(_PALETTE)]
        for i, j in _region_edges_3d(r.vertices):
            cv.line(_iso(r.vertices[i]), _iso(r.vertices[j]), stroke=color, width=0.8)
    for idx, b in enumerate(scene.boundaries):
        color = _PALETTE[(idx + 3) % len(_PALETTE)]
        ring = []
        for lam in b.extent:
            p = np.empty(3)
            p[b.free_axes[0]], p[b.free_axes[1]] = lam
            p[b.solved_axis] = (b.offset - np.dot(
                [b.normal[a] for a in b.free_axes], lam)) / b.normal[b.solved_axis]
            ring.append(_iso(p))
        cv.polygon(ring, fill=color, stroke=color, width=2.0, opacity=0.12)
    if path is not None:
        cv.polyline([_iso(p) for p in path], stroke="#000000", width=2.0)
    if junctions is not None:
        for p in junctions:
            cv.circle(_iso(p), r_px=4.5, fill="#000000")
    if start is not None:
        cv.circle(_iso(start), r_px=5.0, fill="#d62728")
    if goal is not None:
        cv.circle(_iso(goal), r_px=5.0, fill="#2ca02c")
    return cv.render()


def partition_svg(grid: FlowGrid, labels, lines=None, width: int = 640) -> str:
    """Label map as colored cells with fitted boundary lines overlaid."""
    labels = np.asarray(labels)
    xs = grid.positions[:, 0, 0]
    ys = grid.positions[0, :, 1]
    w = float(np.min(np.diff(xs))) if len(xs) > 1 else 1.0
    h = float(np.min(np.diff(ys))) if len(ys) > 1 else 1.0
    cv = Canvas(xs.min() - w / 2, ys.min() - h / 2, xs.max() + w / 2, ys.max() + h / 2, width=width)
    for i in range(grid.nx):
        for j in range(grid.ny):
            cv.rect_cell(grid.positions[i, j], w, h,
                         _PALETTE[int(labels[i, j]) % len(_PALETTE)])
    if lines:
        x0, x1 = xs.min() - w, xs.max() + w
        for fit in lines:
            if fit.vertical:
                cv.line((fit.c, ys.min() - h), (fit.c, ys.max() + h), stroke="#000000", width=2.0)
            else:
                cv.line((x0, -fit.a * x0 - fit.c), (x1, -fit.a * x1 - fit.c),
                        stroke="#000000", width=2.0)
    return cv.render()
