from dataclasses import dataclass
from typing import Union

from .flow import PathSegment, TraceResult
from .periodic import ClosedGeodesic, Cylinder, SaddleConnection
from .surface import Surface


@dataclass(frozen=True)
class TraceOverlay:
    result: TraceResult


@dataclass(frozen=True)
class GeodesicOverlay:
    geodesic: ClosedGeodesic
    # One period of the geodesic, chart by chart.
    path: tuple[PathSegment, ...]


@dataclass(frozen=True)
class SaddleConnectionOverlay:
    connection: SaddleConnection


@dataclass(frozen=True)
class CylinderOverlay:
    cylinder: Cylinder
    core_path: tuple[PathSegment, ...]


Overlay = Union[TraceOverlay, GeodesicOverlay, SaddleConnectionOverlay, CylinderOverlay]


@dataclass(frozen=True, slots=True)
class Viewport:
    """Pixels per unit of the largest polygon, outer margin and gap between polygons."""

    scale: float = 240.0
    margin: float = 24.0
    gap: float = 36.0


@dataclass(frozen=True)
class RenderSpec:
    surface: Surface
    overlays: tuple[Overlay, ...] = ()
    viewport: Viewport = Viewport()
    stroke_width: float = 1.5
    labels: bool = True
