import logging
import math
from collections import deque
from dataclasses import dataclass, replace

from ..models.flow import HitSingularity, PathSegment, TraceConfig, TraceResult
from ..models.geometry import TWO_PI, AffineMap, Corner, DirectionAngle, EdgeRef, cross, normalize_angle
from ..models.periodic import SaddleConnection
from ..models.surface import Surface
from ..utils.custom_exceptions import (
    InvalidStartException,
    NotASaddleConnectionException,
    SaddleConnectionNotFoundException,
)
from .surface_service import in_corner_sector
from .tracer_service import trace_separatrix

logger = logging.getLogger(__name__)

MAX_NODES_PER_CORNER = 50_000
_WEDGE_MIN = 1e-12
_LENGTH_RTOL = 1e-6


@dataclass(slots=True)
class _Node:
    polygon: int
    # polygon coordinates -> start chart
    chart: AffineMap
    entry: int | None
    lo: float
    hi: float


def connection_from_trace(s: Surface, corner: Corner, result: TraceResult) -> SaddleConnection:
    if not isinstance(result.outcome, HitSingularity):
        raise NotASaddleConnectionException(
            detail=f"Separatrix from {tuple(corner)} does not end at a singularity"
        )
    return SaddleConnection(
        start_singularity=s.vertex_class_of(corner),
        end_singularity=result.outcome.singularity,
        start_corner=corner,
        signature=result.signature,
        direction=result.direction,
        chart_length=result.length,
        pieces=result.path,
    )


def connection_along_edge(s: Surface, edge: EdgeRef) -> SaddleConnection:
    """The saddle connection carried by a polygon edge, oriented like the edge."""
    if not s.has_edge(edge):
        raise NotASaddleConnectionException(detail=f"Unknown edge {tuple(edge)}")
    poly = s.polygon(edge.polygon)
    i = edge.edge_index
    start, end = poly.edge_start(i), poly.edge_end(i)
    return SaddleConnection(
        start_singularity=s.vertex_class_of(Corner(poly.id, i)),
        end_singularity=s.vertex_class_of(Corner(poly.id, (i + 1) % len(poly))),
        start_corner=Corner(poly.id, i),
        signature=(),
        direction=DirectionAngle(poly.outgoing_angle(i)),
        chart_length=poly.edge_length(i),
        pieces=(PathSegment(poly.id, start, end),),
    )


def _anchor(s: Surface, sc: SaddleConnection) -> tuple:
    """Chart-independent label of the first piece's midpoint."""
    piece = sc.pieces[0]
    mid = 0.5 * (piece.start + piece.end)
    poly = s.polygon(piece.polygon)
    tol = s.edge_eps(poly.id)
    for i in range(len(poly)):
        coord = poly.edge_coordinate(i, mid)
        if 0.0 <= coord <= 1.0 and abs(poly.point_on_edge(i, coord) - mid) <= tol:
            edge = EdgeRef(poly.id, i)
            canonical = s.canonical_edge(edge)
            if canonical != edge:
                coord = 1.0 - coord
            return ("edge", canonical, round(coord, 6))
    return ("poly", poly.id, round(mid.real, 6), round(mid.imag, 6))


def _key(s: Surface, sc: SaddleConnection) -> tuple:
    return (
        sc.start_singularity,
        round(sc.direction.theta, 9),
        round(sc.chart_length, 6),
        _anchor(s, sc),
    )


def _spans(phi_a: float, delta: float, lo: float, hi: float) -> list[tuple[float, float]]:
    spans = []
    for shift in (0.0, -TWO_PI):
        a, b = max(lo, phi_a + shift), min(hi, phi_a + delta + shift)
        if b - a > _WEDGE_MIN:
            spans.append((a, b))
    return spans


def _candidates(
    s: Surface, corner: Corner, bound: float
) -> list[tuple[float, float, int]]:
    """Developed vertices seen from ``corner`` within ``bound``: (direction, length, class)."""
    root = s.polygon(corner.polygon)
    v = root.vertex(corner.vertex)
    lo = root.outgoing_angle(corner.vertex)
    queue = deque([_Node(root.id, AffineMap.identity(), None, lo, lo + root.interior_angle(corner.vertex))])
    found: dict[tuple[float, float], tuple[float, float, int]] = {}
    visited = 0

    while queue:
        node = queue.popleft()
        visited += 1
        if visited > MAX_NODES_PER_CORNER:
            logger.warning(
                "Saddle connection search truncated at corner %s after %s charts",
                tuple(corner),
                MAX_NODES_PER_CORNER,
            )
            break
        poly = s.polygon(node.polygon)
        n = len(poly)
        developed = [node.chart(poly.vertex(k)) for k in range(n)]

        for k, point in enumerate(developed):
            offset = point - v
            r = abs(offset)
            if r <= 1e-12 * root.diameter or r > bound * (1.0 + 1e-12):
                continue
            phi = lo + normalize_angle(math.atan2(offset.imag, offset.real) - lo)
            if phi > lo + TWO_PI - 1e-12:
                phi -= TWO_PI
            if node.lo - 1e-12 <= phi <= node.hi + 1e-12:
                if s.is_regular_corner(Corner(poly.id, k)):
                    continue
                target = s.vertex_class_of(Corner(poly.id, k))
                found.setdefault((round(phi, 12), round(r, 9)), (phi, r, target))

        if node.chart.a * poly.diameter < 1e-12 * bound:
            continue

        for k in range(n):
            if k == node.entry:
                continue
            glued = s.glued(EdgeRef(poly.id, k))
            if glued is None:
                continue
            a, b = developed[k], developed[(k + 1) % n]
            if cross(b - a, v - a) <= 1e-12 * abs(b - a) * root.diameter:
                continue
            w = b - a
            t = max(0.0, min(1.0, ((v - a) * w.conjugate()).real / abs(w) ** 2))
            if abs(a + t * w - v) > bound:
                continue
            da, db = a - v, b - v
            phi_a = lo + normalize_angle(math.atan2(da.imag, da.real) - lo)
            delta = math.atan2(cross(da, db), (da * db.conjugate()).real)
            other, crossing_map = glued
            for span_lo, span_hi in _spans(phi_a, delta, node.lo, node.hi):
                queue.append(
                    _Node(
                        other.polygon,
                        node.chart.compose(crossing_map.inverse()),
                        other.edge_index,
                        span_lo,
                        span_hi,
                    )
                )

    return sorted(found.values())


def enumerate_saddle_connections(
    s: Surface, max_chart_length: float, cfg: TraceConfig | None = None
) -> list[SaddleConnection]:
    """
    Lists saddle connections of chart length at most ``max_chart_length``.

    Polygon chains are developed breadth-first into each corner's chart and
    every singularity image inside the visible wedge is confirmed by tracing
    the separatrix toward it. Lengths are measured in the start corner's chart.
    The result is sorted by (direction, length).
    """
    if max_chart_length <= 0.0:
        return []
    cfg = cfg or TraceConfig()

    connections: dict[tuple, SaddleConnection] = {}
    for edge in s.edges():
        n = len(s.polygon(edge.polygon))
        ends = (Corner(edge.polygon, edge.edge_index), Corner(edge.polygon, (edge.edge_index + 1) % n))
        if any(s.is_regular_corner(c) for c in ends):
            continue
        sc = connection_along_edge(s, edge)
        if sc.chart_length <= max_chart_length:
            connections.setdefault(_key(s, sc), sc)

    for corner in s.corners():
        if s.is_regular_corner(corner):
            continue
        for phi, length, target in _candidates(s, corner, max_chart_length):
            theta = normalize_angle(phi)
            if not in_corner_sector(s, corner, theta):
                continue
            budget = replace(cfg, max_path_length=length * (1.0 + 1e-3) + 1e-9)
            try:
                result = trace_separatrix(s, corner, DirectionAngle(theta), budget, detect_cycles=False)
            except InvalidStartException:
                continue
            outcome = result.outcome
            if not isinstance(outcome, HitSingularity) or outcome.singularity != target:
                continue
            if abs(result.length - length) > _LENGTH_RTOL * max(length, 1.0):
                continue
            sc = connection_from_trace(s, corner, result)
            connections.setdefault(_key(s, sc), sc)

    ordered = sorted(
        connections.values(), key=lambda c: (c.direction.theta, c.chart_length, c.start_singularity)
    )
    logger.debug("Saddle connections enumerated", extra={"count": len(ordered), "bound": max_chart_length})
    return ordered


def verify_saddle_connection(s: Surface, sc: SaddleConnection, cfg: TraceConfig | None = None) -> None:
    """Re-traces ``sc`` from its start corner; raises when it is not a saddle connection of ``s``."""
    cfg = cfg or TraceConfig()
    if not sc.pieces:
        raise NotASaddleConnectionException()
    budget = replace(cfg, max_path_length=sc.chart_length * (1.0 + 1e-3) + 1e-9)
    try:
        result = trace_separatrix(s, sc.start_corner, sc.direction, budget, detect_cycles=False)
    except InvalidStartException as exc:
        raise NotASaddleConnectionException(detail=str(exc)) from exc
    outcome = result.outcome
    if (
        not isinstance(outcome, HitSingularity)
        or outcome.singularity != sc.end_singularity
        or abs(result.length - sc.chart_length) > _LENGTH_RTOL * max(sc.chart_length, 1.0)
    ):
        raise NotASaddleConnectionException()


def find_saddle_connection(
    s: Surface, sc_id: str, max_chart_length: float, cfg: TraceConfig | None = None
) -> SaddleConnection:
    for sc in enumerate_saddle_connections(s, max_chart_length, cfg):
        if sc.id == sc_id:
            return sc
    for edge in s.edges():
        sc = connection_along_edge(s, edge)
        if sc.id == sc_id:
            return sc
    raise SaddleConnectionNotFoundException(sc_id)
