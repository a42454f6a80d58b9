"""
Deterministic SVG pictures of operator graphs on R (the graph lives in R^2).

Exact graph pieces are drawn as segments, points or shaded polygons clipped to
the box; other operators are drawn from a dense primal-grid sample. Overlays
add probe points, witness markers, the shear image Phi_sigma(gph T) and the
resolvent graph {(J(x) + lambda v, x)}.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import UnsupportedDimensionError
from core.normgeom import GraphPoint, duality_map
from operators.box import Box
from operators.operator import Operator
from utils.rational import to_floats

Point2 = Tuple[float, float]
# ("piece", ordered vertices) or ("curve", points sorted by x)
Shape = Tuple[str, List[np.ndarray]]

COLORS = {
    "graph": "#1f4e9c",
    "shear": "#c0392b",
    "resolvent": "#27ae60",
    "probe": "#555555",
    "witness": "#e67e22",
    "axis": "#bbbbbb",
}


class SVG:
    """String-built SVG 1.1 document."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.svg = (
            '<?xml version="1.0" standalone="no"?>\n'
            '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">\n'
            f'<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
            'xmlns="http://www.w3.org/2000/svg">\n'
        )

    def group_start(self, group_id: str, extra: str = ""):
        attrs = f" {extra}" if extra else ""
        self.svg += f'<g id="{group_id}"{attrs}>\n'

    def group_end(self):
        self.svg += "</g>\n"

    def line(self, a: Point2, b: Point2, stroke: str, width: float = 2.0, extra: str = ""):
        self.svg += (
            f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" y2="{b[1]:.2f}" '
            f'stroke="{stroke}" stroke-width="{width:.1f}" {extra}/>\n'
        )

    def polyline(self, points: Sequence[Point2], stroke: str, width: float = 2.0):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width:.1f}"/>\n'

    def polygon(self, points: Sequence[Point2], fill: str, opacity: float = 0.25):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polygon points="{coords}" fill="{fill}" fill-opacity="{opacity:.2f}" stroke="{fill}"/>\n'

    def circle(self, c: Point2, r: float, fill: str):
        self.svg += f'<circle cx="{c[0]:.2f}" cy="{c[1]:.2f}" r="{r:.1f}" fill="{fill}"/>\n'

    def cross(self, c: Point2, size: float, stroke: str):
        self.line((c[0] - size, c[1] - size), (c[0] + size, c[1] + size), stroke, 2.5)
        self.line((c[0] - size, c[1] + size), (c[0] + size, c[1] - size), stroke, 2.5)

    def text(self, x: float, y: float, string: str, extra: str = ""):
        safe = string.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-family="monospace" font-size="12" {extra}>{safe}</text>\n'

    def clip_rect(self, clip_id: str, x: float, y: float, w: float, h: float):
        self.svg += (
            f'<defs><clipPath id="{clip_id}"><rect x="{x:.2f}" y="{y:.2f}" '
            f'width="{w:.2f}" height="{h:.2f}"/></clipPath></defs>\n'
        )

    def get_svg(self) -> str:
        return f"{self.svg}</svg>\n"


class _Canvas:
    """Maps the box window [x_lo, x_hi] x [v_lo, v_hi] onto the pixel area inside the margins."""

    def __init__(self, box: Box, width: int, height: int, margin: int):
        (self.x_lo,), (self.x_hi,) = box.x_bounds()
        (self.v_lo,), (self.v_hi,) = box.v_bounds()
        self.width = width
        self.height = height
        self.margin = margin

    def __call__(self, x: float, v: float) -> Point2:
        m = self.margin
        px = m + (x - self.x_lo) / (self.x_hi - self.x_lo) * (self.width - 2 * m)
        py = self.height - m - (v - self.v_lo) / (self.v_hi - self.v_lo) * (self.height - 2 * m)
        return px, py


def _ordered(points: List[np.ndarray]) -> List[np.ndarray]:
    """Distinct points; three or more are ordered around their centroid."""
    unique: Dict[tuple, np.ndarray] = {}
    for p in points:
        unique.setdefault(tuple(np.round(p, 9) + 0.0), p)
    pts = [unique[k] for k in sorted(unique)]
    if len(pts) < 3:
        return pts
    c = np.mean(pts, axis=0)
    return sorted(pts, key=lambda p: math.atan2(p[1] - c[1], p[0] - c[0]))


def _piece_shapes(op: Operator, box: Box, transform) -> Optional[List[Shape]]:
    pieces = op.exact_pieces()
    if pieces is None or op.localization_boxes():
        return None
    lo, hi = box.cube_bounds()
    shapes = []
    for piece in pieces:
        vertices = [transform(to_floats(v)) for v in piece.vertices_in_cube(lo, hi)]
        if vertices:
            shapes.append(("piece", _ordered(vertices)))
    return shapes


def _sampled_shapes(op: Operator, box: Box, transform, density: int) -> List[Shape]:
    """A single-valued sample becomes one polyline; anything else is drawn point by point."""
    graph = op.sample_graph(box, density)
    points = [transform(p.as_vector()) for p in graph]
    if all(op.evaluate(p.x, box).is_single_point for p in graph):
        return [("curve", sorted(points, key=lambda z: (z[0], z[1])))]
    return [("piece", [p]) for p in points]


def _draw_shapes(svg: SVG, canvas: _Canvas, shapes: List[Shape], color: str):
    for kind, shape in shapes:
        pixels = [canvas(float(z[0]), float(z[1])) for z in shape]
        if len(pixels) == 1:
            svg.circle(pixels[0], 3.0, color)
        elif len(pixels) == 2:
            svg.line(pixels[0], pixels[1], color)
        elif kind == "curve":
            svg.polyline(pixels, color)
        else:
            svg.polygon(pixels, color)


def render_plot(
    op: Operator,
    box: Box,
    probes: Sequence[GraphPoint] = (),
    witnesses: Sequence[GraphPoint] = (),
    shear: Optional[float] = None,
    resolvent: Optional[float] = None,
    density: int = 41,
) -> str:
    """
    SVG text for gph op inside the box, with optional overlays.

    Args:
        probes: Points drawn as small grey dots (e.g. analysis reference points).
        witnesses: Points drawn as orange crosses (FAIL witnesses).
        shear: sigma for the Phi_sigma image of the graph.
        resolvent: lambda for the graph of (J + lambda T)^{-1}, drawn as (y, x) pairs.
    """
    if op.dim != 1:
        raise UnsupportedDimensionError(f"Plots need a graph in R^2; '{op.name}' has dimension {op.dim}.")
    width, height, margin = config.SVG_WIDTH, config.SVG_HEIGHT, config.SVG_MARGIN
    canvas = _Canvas(box, width, height, margin)
    svg = SVG(width, height)
    svg.clip_rect("window", margin, margin, width - 2 * margin, height - 2 * margin)

    svg.group_start("axes")
    if canvas.x_lo <= 0.0 <= canvas.x_hi:
        svg.line(canvas(0.0, canvas.v_lo), canvas(0.0, canvas.v_hi), COLORS["axis"], 1.0)
    if canvas.v_lo <= 0.0 <= canvas.v_hi:
        svg.line(canvas(canvas.x_lo, 0.0), canvas(canvas.x_hi, 0.0), COLORS["axis"], 1.0)
    svg.text(margin, height - margin / 3, f"x in [{canvas.x_lo:.3g}, {canvas.x_hi:.3g}]")
    svg.text(margin, margin * 2 / 3, f"{op.name}: v in [{canvas.v_lo:.3g}, {canvas.v_hi:.3g}]")
    svg.group_end()

    spec = box.spec
    layers = [("graph", lambda z: z)]
    if shear is not None:
        layers.append(("shear", lambda z: np.array([z[0], z[1] + shear * duality_map(z[:1], spec)[0]])))
    if resolvent is not None:
        layers.append(("resolvent", lambda z: np.array([duality_map(z[:1], spec)[0] + resolvent * z[1], z[0]])))

    for name, transform in layers:
        shapes = _piece_shapes(op, box, transform)
        if shapes is None:
            shapes = _sampled_shapes(op, box, transform, density)
        svg.group_start(name, 'clip-path="url(#window)"')
        _draw_shapes(svg, canvas, shapes, COLORS[name])
        svg.group_end()

    svg.group_start("probes")
    for p in probes:
        svg.circle(canvas(float(p.x[0]), float(p.v[0])), 4.0, COLORS["probe"])
    svg.group_end()
    svg.group_start("witnesses")
    for p in witnesses:
        svg.cross(canvas(float(p.x[0]), float(p.v[0])), 6.0, COLORS["witness"])
    svg.group_end()
    logging.debug("Rendered %s with %d overlay layers.", op.name, len(layers) - 1)
    return svg.get_svg()
