import logging
import math
from collections.abc import Sequence
from dataclasses import replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from shapely.geometry import LinearRing
from shapely.geometry import Polygon as ShapelyPolygon

from .. import config
from ..models.geometry import TWO_PI, AffineMap, Corner, EdgeRef, Polygon, cross
from ..models.surface import EdgePairing, Singularity, Surface
from ..schemas import SurfaceFile
from ..utils.custom_exceptions import (
    BareBoundaryComponentException,
    BrokenChainException,
    DisconnectedSurfaceException,
    MalformedSurfaceException,
    NegativeRatioException,
    NonParallelEdgesException,
    SelfIntersectingPolygonException,
)

logger = logging.getLogger(__name__)


def _build_polygons(spec: SurfaceFile) -> dict[int, Polygon]:
    polygons: dict[int, Polygon] = {}
    for poly_spec in spec.polygons:
        if poly_spec.id in polygons:
            raise MalformedSurfaceException(detail=f"Duplicate polygon id {poly_spec.id}")
        coords = [(float(x), float(y)) for x, y in poly_spec.vertices]
        if not np.all(np.isfinite(np.asarray(coords))):
            raise MalformedSurfaceException(
                detail=f"Polygon {poly_spec.id} has non-finite coordinates"
            )

        ring = LinearRing(coords)
        if not ring.is_simple or not ShapelyPolygon(coords).is_valid:
            raise SelfIntersectingPolygonException(poly_spec.id)

        polygon = Polygon(id=poly_spec.id, vertices=tuple(complex(x, y) for x, y in coords))
        if polygon.signed_area <= 0.0:
            raise SelfIntersectingPolygonException(
                poly_spec.id, reason="vertices are not counterclockwise"
            )
        if min(polygon.edge_length(i) for i in range(len(polygon))) <= 0.0:
            raise MalformedSurfaceException(
                detail=f"Polygon {poly_spec.id} has a zero-length edge"
            )
        polygons[polygon.id] = polygon
    if not polygons:
        raise MalformedSurfaceException(detail="Surface has no polygons")
    return polygons


def _check_edge(polygons: dict[int, Polygon], raw: Sequence[int]) -> EdgeRef:
    edge = EdgeRef(int(raw[0]), int(raw[1]))
    poly = polygons.get(edge.polygon)
    if poly is None or not 0 <= edge.edge_index < len(poly):
        raise MalformedSurfaceException(detail=f"Edge {tuple(edge)} out of range")
    return edge


def _pair_edges(
    polygons: dict[int, Polygon], e: EdgeRef, f: EdgeRef, eps_geo: float
) -> EdgePairing:
    pe, pf = polygons[e.polygon], polygons[f.polygon]
    ve, vf = pe.edge_vector(e.edge_index), pf.edge_vector(f.edge_index)
    le, lf = abs(ve), abs(vf)
    scale = max(pe.diameter, pf.diameter)

    if abs(cross(ve, vf)) > eps_geo * le * lf:
        raise NonParallelEdgesException(e, f)
    if (ve * vf.conjugate()).real > 0.0:
        raise NegativeRatioException(e, f)

    ratio = lf / le
    if abs(vf + ratio * ve) > eps_geo * scale:
        raise NonParallelEdgesException(e, f)

    # e.start -> f.end, e.end -> f.start
    b = pf.edge_end(f.edge_index) - ratio * pe.edge_start(e.edge_index)
    return EdgePairing(e=e, f=f, ratio=ratio, map=AffineMap(ratio, b))


def _component_labels(polygons: dict[int, Polygon], pairings: list[EdgePairing]):
    ids = sorted(polygons)
    position = {pid: k for k, pid in enumerate(ids)}
    rows = [position[p.e.polygon] for p in pairings]
    cols = [position[p.f.polygon] for p in pairings]
    graph = coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids))
    )
    count, labels = connected_components(graph, directed=False)
    return int(count), {pid: int(labels[position[pid]]) for pid in ids}


def _cw_step(polygons, crossing, corner: Corner) -> Corner | None:
    glued = crossing.get(EdgeRef(corner.polygon, corner.vertex))
    if glued is None:
        return None
    other = glued[0]
    return Corner(other.polygon, (other.edge_index + 1) % len(polygons[other.polygon]))


def _ccw_step(polygons, crossing, corner: Corner) -> tuple[Corner, float] | None:
    n = len(polygons[corner.polygon])
    incoming = EdgeRef(corner.polygon, (corner.vertex - 1) % n)
    glued = crossing.get(incoming)
    if glued is None:
        return None
    other, chart_map = glued
    return Corner(other.polygon, other.edge_index), chart_map.a


def _vertex_classes(polygons, crossing) -> list[tuple[list[Corner], float, bool]]:
    """Group corners into vertex classes: (corners ccw, ratio, on_boundary)."""
    seen: set[Corner] = set()
    classes = []
    for pid in sorted(polygons):
        for i in range(len(polygons[pid])):
            origin = Corner(pid, i)
            if origin in seen:
                continue

            start = origin
            on_boundary = False
            while True:
                prev = _cw_step(polygons, crossing, start)
                if prev is None:
                    on_boundary = True
                    break
                start = prev
                if start == origin:
                    break

            corners = [start]
            ratio = 1.0
            current = start
            while True:
                step = _ccw_step(polygons, crossing, current)
                if step is None:
                    break
                current, a = step
                ratio *= a
                if current == start:
                    break
                corners.append(current)

            seen.update(corners)
            classes.append((corners, ratio, on_boundary))
    return classes


def _loop_holonomy(polygons, crossing, corners: list[Corner]) -> AffineMap:
    holonomy = AffineMap.identity()
    for corner in corners:
        n = len(polygons[corner.polygon])
        incoming = EdgeRef(corner.polygon, (corner.vertex - 1) % n)
        holonomy = crossing[incoming][1].compose(holonomy)
    return holonomy


def _boundary_components(polygons, crossing) -> list[tuple[EdgeRef, ...]]:
    unpaired = [
        EdgeRef(pid, i)
        for pid in sorted(polygons)
        for i in range(len(polygons[pid]))
        if EdgeRef(pid, i) not in crossing
    ]
    seen: set[EdgeRef] = set()
    components = []
    for first in unpaired:
        if first in seen:
            continue
        cycle = []
        edge = first
        while edge not in seen:
            seen.add(edge)
            cycle.append(edge)
            corner = Corner(edge.polygon, (edge.edge_index + 1) % len(polygons[edge.polygon]))
            while (nxt := _cw_step(polygons, crossing, corner)) is not None:
                corner = nxt
            edge = EdgeRef(corner.polygon, corner.vertex)
        components.append(tuple(cycle))
    return components


def validate(
    spec: SurfaceFile,
    *,
    require_connected: bool = True,
    auto_mark: bool = True,
    eps_geo: float = config.EPS_GEO,
    name: str = "surface",
) -> Surface:
    """
    Builds a Surface from polygons and edge pairings, checking every structural invariant.

    Args:
        spec: polygons, pairings and declared marked points
        require_connected: raise DisconnectedSurfaceException for several components
        auto_mark: mark a point on bare boundary components instead of failing
        eps_geo: geometric tolerance relative to polygon diameter

    Returns:
        Surface: immutable surface with singularities, boundary and genus
    """
    polygons = _build_polygons(spec)

    pairings: list[EdgePairing] = []
    crossing: dict[EdgeRef, tuple[EdgeRef, AffineMap]] = {}
    for raw_e, raw_f in spec.pairings:
        e, f = _check_edge(polygons, raw_e), _check_edge(polygons, raw_f)
        if e == f:
            raise MalformedSurfaceException(detail=f"Edge {tuple(e)} paired with itself")
        for edge in (e, f):
            if edge in crossing:
                raise MalformedSurfaceException(
                    detail=f"Edge {tuple(edge)} appears in more than one pairing"
                )
        pairing = _pair_edges(polygons, e, f, eps_geo)
        pairings.append(pairing)
        crossing[e] = (f, pairing.map)
        crossing[f] = (e, pairing.map.inverse())

    for pairing in pairings:
        round_trip = crossing[pairing.f][1].compose(pairing.map)
        scale = polygons[pairing.e.polygon].diameter
        if not round_trip.is_identity(eps_geo, scale):
            raise MalformedSurfaceException(
                detail=f"Pairing {tuple(pairing.e)}-{tuple(pairing.f)} is not involutive"
            )

    components, labels = _component_labels(polygons, pairings)
    if require_connected and components > 1:
        raise DisconnectedSurfaceException(components)

    declared = set()
    for raw in spec.marked_points:
        corner = Corner(int(raw[0]), int(raw[1]))
        poly = polygons.get(corner.polygon)
        if poly is None or not 0 <= corner.vertex < len(poly):
            raise MalformedSurfaceException(detail=f"Marked point {tuple(corner)} out of range")
        declared.add(corner)

    singularities: list[Singularity] = []
    vertex_class: dict[Corner, int] = {}
    for sid, (corners, ratio, on_boundary) in enumerate(_vertex_classes(polygons, crossing)):
        angle = math.fsum(polygons[c.polygon].interior_angle(c.vertex) for c in corners)
        flat_ratio = abs(ratio - 1.0) <= eps_geo
        is_marked = bool(declared.intersection(corners))
        if on_boundary:
            index = None
        else:
            index = round(angle / TWO_PI)
            if index < 1 or abs(angle - index * TWO_PI) > 1e-6 * len(corners):
                raise MalformedSurfaceException(
                    detail=f"Cone angle {angle} at vertex class {sid} is not a multiple of 2π"
                )
            holonomy = _loop_holonomy(polygons, crossing, corners)
            apex = polygons[corners[0].polygon].vertex(corners[0].vertex)
            if abs(holonomy(apex) - apex) > eps_geo * polygons[corners[0].polygon].diameter:
                raise MalformedSurfaceException(
                    detail=f"Holonomy around vertex class {sid} does not fix its vertex"
                )
            if index == 1 and not flat_ratio:
                logger.info(
                    "Index-1 singularity with nontrivial ratio",
                    extra={"singularity": sid, "ratio": ratio},
                )
        singularities.append(
            Singularity(
                id=sid,
                corners=tuple(corners),
                cone_angle=angle,
                index=index,
                dilation_ratio=ratio,
                on_boundary=on_boundary,
                is_marked=is_marked,
            )
        )
        for corner in corners:
            vertex_class[corner] = sid

    boundary = _boundary_components(polygons, crossing)
    for k, component in enumerate(boundary):
        classes = {vertex_class[Corner(e.polygon, e.edge_index)] for e in component}
        if any(singularities[c].is_singular for c in classes):
            continue
        if not auto_mark:
            raise BareBoundaryComponentException(k)
        sid = vertex_class[Corner(component[0].polygon, component[0].edge_index)]
        singularities[sid] = replace(singularities[sid], is_marked=True)
        logger.warning(
            "Boundary component %s has no singularity; marking vertex class %s",
            k,
            sid,
        )

    bounded = {labels[component[0].polygon] for component in boundary}
    for label in sorted(set(range(components)) - bounded):
        classes = [sing for sing in singularities if labels[sing.corners[0].polygon] == label]
        if not classes or any(sing.is_singular for sing in classes) or not auto_mark:
            continue
        sid = classes[0].id
        singularities[sid] = replace(singularities[sid], is_marked=True)
        logger.warning(
            "Closed component %s has no singularity; marking vertex class %s", label, sid
        )

    chi_by_component = [0] * components
    boundary_by_component = [0] * components
    for sing in singularities:
        chi_by_component[labels[sing.corners[0].polygon]] += 1
    for pairing in pairings:
        chi_by_component[labels[pairing.e.polygon]] -= 1
    for component in boundary:
        boundary_by_component[labels[component[0].polygon]] += 1
        for edge in component:
            chi_by_component[labels[edge.polygon]] -= 1
    for pid in polygons:
        chi_by_component[labels[pid]] += 1

    genus = 0
    for chi, holes in zip(chi_by_component, boundary_by_component):
        doubled = 2 - chi - holes
        if doubled < 0 or doubled % 2:
            raise MalformedSurfaceException(
                detail=f"Inconsistent Euler characteristic {chi} with {holes} boundary components"
            )
        genus += doubled // 2
    euler = sum(chi_by_component)

    if not boundary:
        index_sum = sum(s.index - 1 for s in singularities if s.index is not None)
        if index_sum != -euler:
            raise MalformedSurfaceException(
                detail=f"Index sum {index_sum} violates Gauss-Bonnet (2g-2 = {-euler})"
            )

    surface = Surface(
        polygons=tuple(polygons[pid] for pid in sorted(polygons)),
        pairings=tuple(pairings),
        singularities=tuple(singularities),
        boundary_components=tuple(boundary),
        genus=genus,
        components=components,
        euler_characteristic=euler,
        marked_points=tuple(sorted(declared)),
        eps_geo=eps_geo,
        name=name,
        _polygon_by_id=polygons,
        _crossing=crossing,
        _vertex_class=vertex_class,
    )
    logger.debug(
        "Surface validated",
        extra={"surface": name, "genus": genus, "singularities": len(singularities)},
    )
    return surface


def holonomy_of_path(s: Surface, path: Sequence[EdgeRef]) -> AffineMap:
    """Composition of the chart changes met along a chain of edge crossings."""
    holonomy = AffineMap.identity()
    current_polygon: int | None = None
    for position, raw in enumerate(path):
        edge = EdgeRef(*raw)
        if not s.has_edge(edge) or not s.is_paired(edge):
            raise BrokenChainException(position)
        if current_polygon is not None and edge.polygon != current_polygon:
            raise BrokenChainException(position)
        holonomy = s.crossing_map(edge).compose(holonomy)
        current_polygon = s.partner(edge).polygon  # type: ignore[union-attr]
    return holonomy


def in_corner_sector(s: Surface, corner: Corner, theta: float) -> bool:
    """True when direction ``theta`` leaves ``corner`` into its sector, lower edge included."""
    poly = s.polygon(corner.polygon)
    lo = poly.outgoing_angle(corner.vertex)
    offset = math.fmod(theta - lo, TWO_PI)
    if offset < 0.0:
        offset += TWO_PI
    if offset > TWO_PI - 1e-12:
        offset = 0.0
    return offset < s.corner_angle(corner) - 1e-12
