"""SVG rendering of polygon nets with overlays, and of sweep reports."""
import logging
import math
import string
from dataclasses import replace

import svgwrite

from ..models.flow import PathSegment, TraceConfig
from ..models.periodic import ClosedGeodesic, Cylinder
from ..models.render import (
    CylinderOverlay,
    GeodesicOverlay,
    Overlay,
    RenderSpec,
    SaddleConnectionOverlay,
    TraceOverlay,
)
from ..models.surface import Surface
from ..models.sweep import SweepReport
from ..utils.custom_exceptions import MalformedSurfaceException
from .tracer_service import trace_from_edge

logger = logging.getLogger(__name__)

CLASS_COLOURS = {
    "morse_smale": "#2e7d32",
    "saddle_connection": "#c62828",
    "unresolved": "#9e9e9e",
}
_DIGITS = 3


def _r(value: float) -> float:
    return round(value, _DIGITS) + 0.0


def geodesic_path(s: Surface, g: ClosedGeodesic, cfg: TraceConfig | None = None) -> tuple[PathSegment, ...]:
    """Segments of one period of ``g``, traced from its base point."""
    one_period = replace(cfg or TraceConfig(), max_crossings=len(g.signature))
    result = trace_from_edge(s, g.base.edge, g.base.coord, g.direction, one_period, detect_cycles=False)
    return result.path


def geodesic_overlay(s: Surface, g: ClosedGeodesic) -> GeodesicOverlay:
    return GeodesicOverlay(g, geodesic_path(s, g))


def cylinder_overlay(s: Surface, cylinder: Cylinder) -> CylinderOverlay:
    return CylinderOverlay(cylinder, geodesic_path(s, cylinder.core))


class _Layout:
    """Places every polygon side by side, y axis pointing up."""

    def __init__(self, spec: RenderSpec):
        s = spec.surface
        view = spec.viewport
        self.unit = view.scale / s.diameter
        self.offsets: dict[int, complex] = {}
        x = view.margin
        top = 0.0
        for poly in s.polygons:
            xs = [v.real for v in poly.vertices]
            ys = [v.imag for v in poly.vertices]
            self.offsets[poly.id] = complex(x - min(xs) * self.unit, max(ys) * self.unit)
            x += (max(xs) - min(xs)) * self.unit + view.gap
            top = max(top, (max(ys) - min(ys)) * self.unit)
        self.width = x - view.gap + view.margin
        self.height = top + 2.0 * view.margin
        self.margin = view.margin
        self.max_y = {p.id: max(v.imag for v in p.vertices) for p in s.polygons}

    def point(self, polygon: int, z: complex) -> tuple[float, float]:
        if polygon not in self.offsets:
            raise MalformedSurfaceException(detail=f"Overlay refers to unknown polygon {polygon}")
        offset = self.offsets[polygon]
        return (
            _r(offset.real + z.real * self.unit),
            _r(self.margin + (self.max_y[polygon] - z.imag) * self.unit),
        )


def _ramp(ratio: float, spread: float) -> str:
    """Blue for contracted, red for expanded charts."""
    t = 0.5 if spread <= 0.0 else 0.5 + 0.5 * max(-1.0, min(1.0, math.log(ratio) / spread))
    red, blue = round(255 * t), round(255 * (1.0 - t))
    return f"rgb({red},40,{blue})"


def _draw_segments(dwg, group, layout: _Layout, segments, colour: str, width: float, opacity: float = 1.0):
    for segment in segments:
        group.add(
            dwg.line(
                layout.point(segment.polygon, segment.start),
                layout.point(segment.polygon, segment.end),
                stroke=colour,
                stroke_width=width,
                stroke_opacity=opacity,
            )
        )


def _draw_overlay(dwg, layout: _Layout, overlay: Overlay, width: float):
    group = dwg.g()
    match overlay:
        case TraceOverlay(result=result):
            ratios = [1.0] + [c.accumulated_ratio for c in result.crossings]
            spread = max((abs(math.log(r)) for r in ratios), default=0.0)
            for k, segment in enumerate(result.path):
                colour = _ramp(ratios[min(k, len(ratios) - 1)], spread)
                _draw_segments(dwg, group, layout, [segment], colour, width)
        case GeodesicOverlay(path=path):
            _draw_segments(dwg, group, layout, path, "#6a1b9a", 2.0 * width)
        case SaddleConnectionOverlay(connection=sc):
            group.attribs["stroke-dasharray"] = "6,4"
            _draw_segments(dwg, group, layout, sc.pieces, "#ef6c00", width)
        case CylinderOverlay(core_path=path):
            _draw_segments(dwg, group, layout, path, "#ffb300", 12.0 * width, opacity=0.35)
            _draw_segments(dwg, group, layout, path, "#6a1b9a", width)
            for sc in overlay.cylinder.boundary:
                _draw_segments(dwg, group, layout, sc.pieces, "#ef6c00", width)
    dwg.add(group)


def _pairing_labels(s: Surface) -> dict:
    letters = string.ascii_lowercase
    labels = {}
    for k, pairing in enumerate(s.pairings):
        name = letters[k % 26] + ("" if k < 26 else str(k // 26))
        labels[pairing.e] = name
        labels[pairing.f] = name if pairing.ratio == 1.0 else f"{name}·{_r(pairing.ratio):g}"
    return labels


def render_surface(spec: RenderSpec) -> str:
    """SVG document of the polygon net with pairing labels and overlays."""
    s = spec.surface
    layout = _Layout(spec)
    dwg = svgwrite.Drawing(size=(_r(layout.width), _r(layout.height)), profile="full")
    dwg.add(dwg.rect((0, 0), (_r(layout.width), _r(layout.height)), fill="white"))

    net = dwg.g(fill="#f5f5f5", stroke="#212121", stroke_width=1)
    for poly in s.polygons:
        net.add(dwg.polygon([layout.point(poly.id, z) for z in poly.vertices]))
    dwg.add(net)

    boundary = dwg.g(stroke="#212121", stroke_width=3)
    for component in s.boundary_components:
        for edge in component:
            poly = s.polygon(edge.polygon)
            boundary.add(
                dwg.line(
                    layout.point(poly.id, poly.edge_start(edge.edge_index)),
                    layout.point(poly.id, poly.edge_end(edge.edge_index)),
                )
            )
    dwg.add(boundary)

    if spec.labels:
        text = dwg.g(font_size=12, font_family="sans-serif", fill="#1565c0")
        for edge, label in sorted(_pairing_labels(s).items()):
            poly = s.polygon(edge.polygon)
            mid = poly.point_on_edge(edge.edge_index, 0.5)
            w = poly.edge_vector(edge.edge_index)
            # Inward normal of a counterclockwise polygon.
            inward = 1j * w / abs(w) * (10.0 / layout.unit)
            text.add(dwg.text(label, insert=layout.point(poly.id, mid + inward), text_anchor="middle"))
        dwg.add(text)

    for overlay in spec.overlays:
        _draw_overlay(dwg, layout, overlay, spec.stroke_width)

    logger.debug("Rendered surface", extra={"overlays": len(spec.overlays)})
    return dwg.tostring()


def render_sweep(report: SweepReport, width: float = 800.0) -> str:
    """Classification strip over the circle with the hyperbolic-direction histogram below it."""
    strip, gap, histogram, margin = 40.0, 16.0, 120.0, 20.0
    height = 2.0 * margin + strip + gap + histogram
    dwg = svgwrite.Drawing(size=(_r(width + 2 * margin), _r(height)), profile="full")
    dwg.add(dwg.rect((0, 0), (_r(width + 2 * margin), _r(height)), fill="white"))

    records = report.records
    cells = dwg.g()
    for k, record in enumerate(records):
        start = record.theta
        end = records[k + 1].theta if k + 1 < len(records) else 2.0 * math.pi
        x0 = margin + start / (2.0 * math.pi) * width
        x1 = margin + end / (2.0 * math.pi) * width
        cells.add(
            dwg.rect(
                (_r(x0), margin),
                (_r(max(x1 - x0, 0.5)), strip),
                fill=CLASS_COLOURS[record.cls.kind],
            )
        )
    dwg.add(cells)

    stats = report.density_stats
    peak = max(stats.hyperbolic, default=0) or 1
    bar = width / stats.bins
    bars = dwg.g(fill="#6a1b9a")
    base = margin + strip + gap + histogram
    for k, count in enumerate(stats.hyperbolic):
        h = histogram * count / peak
        bars.add(dwg.rect((_r(margin + k * bar), _r(base - h)), (_r(bar * 0.9), _r(h))))
    dwg.add(bars)
    dwg.add(
        dwg.text(
            f"{report.surface_id}  morse-smale {report.morse_smale_fraction:.3f}  "
            f"hyperbolic bins {stats.nonempty_hyperbolic_bins}/{stats.bins}",
            insert=(margin, _r(height - 4.0)),
            font_size=11,
            font_family="sans-serif",
        )
    )
    return dwg.tostring()
