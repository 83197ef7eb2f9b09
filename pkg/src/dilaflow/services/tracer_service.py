import logging
from collections.abc import Collection, Sequence
from dataclasses import dataclass, field

from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon

from ..models.flow import (
    BudgetExhausted,
    CrossedBoundary,
    CrossingRecord,
    FlowPoint,
    HitSingularity,
    LimitCycle,
    PathSegment,
    TraceConfig,
    TraceOutcome,
    TraceResult,
)
from ..models.geometry import Corner, DirectionAngle, EdgeRef, cross
from ..models.periodic import ClosedGeodesic
from ..models.surface import Surface
from ..utils.custom_exceptions import InvalidStartException
from .surface_service import in_corner_sector

logger = logging.getLogger(__name__)

# Relative to polygon diameter: minimal travel before an edge counts as hit.
_T_MIN = 1e-13
_PARALLEL = 1e-14


@dataclass(slots=True)
class _Run:
    """Raw tracer output before conversion to domain records."""

    edges: list[EdgeRef] = field(default_factory=list)
    coords: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    path: list[tuple[int, complex, complex]] = field(default_factory=list)
    outcome: TraceOutcome | None = None
    length: float = 0.0
    # Set when the run stopped on one of the requested edges.
    returned: EdgeRef | None = None


def _detect_cycle(
    edges: Sequence[EdgeRef],
    coords: Sequence[float],
    ratios: Sequence[float],
    cfg: TraceConfig,
    direction: DirectionAngle,
    eps_geo: float,
) -> ClosedGeodesic | None:
    n = len(edges)
    conf = cfg.cycle_confirmations
    last = edges[-1] if n else None
    for period in range(1, min(cfg.max_period, n) + 1):
        window = period * conf
        if n < max(window, 2 * period + 1):
            break
        if edges[n - 1 - period] != last:
            continue
        tail = edges[n - window:]
        if any(tail[k] != tail[k - period] for k in range(period, window)):
            continue
        if ratios[n - 1 - period] == 0.0:
            continue

        lam = ratios[n - 1] / ratios[n - 1 - period]
        if not lam < 1.0 - eps_geo:
            # Multiples of this period carry λ^m >= 1 as well.
            return None

        x0, x1, x2 = coords[n - 1 - 2 * period], coords[n - 1 - period], coords[n - 1]
        d1, d2 = x1 - x0, x2 - x1
        if abs(d2 - lam * d1) > 1e-9 + 1e-6 * abs(d1):
            continue

        fixed = (x2 - lam * x1) / (1.0 - lam)
        # Endpoints occur when the cycle runs through a flat vertex.
        if not -eps_geo <= fixed <= 1.0 + eps_geo:
            continue
        fixed = min(max(fixed, 0.0), 1.0)

        signature = (edges[n - 1],) + tuple(edges[n - period : n - 1])
        return ClosedGeodesic(
            signature=signature,
            direction=direction,
            holonomy=lam,
            base=CrossingRecord(edge=edges[n - 1], coord=fixed, accumulated_ratio=1.0),
            is_hyperbolic=True,
        )
    return None


def detect_limit_cycle(
    history: Sequence[CrossingRecord],
    cfg: TraceConfig,
    direction: DirectionAngle | None = None,
    eps_geo: float = 1e-9,
) -> ClosedGeodesic | None:
    """
    Detects an attracting closed geodesic at the end of a crossing history.

    A cycle is reported when the trailing crossings repeat one cyclic edge
    signature ``cfg.cycle_confirmations`` times, the per-cycle ratio is
    contracting and the edge coordinate decays geometrically toward the fixed
    point of the return map.
    """
    return _detect_cycle(
        [c.edge for c in history],
        [c.coord for c in history],
        [c.accumulated_ratio for c in history],
        cfg,
        direction or DirectionAngle(0.0),
        eps_geo,
    )


def _pass_vertex(
    s: Surface, corner: Corner, theta: float
) -> tuple[Corner | None, list[tuple[EdgeRef, float]], EdgeRef | None]:
    """
    Walks counterclockwise around a flat vertex to the corner ``theta`` leaves from.

    Returns the exit corner, the edges crossed on the way (with their chart
    ratios) and, when the walk reaches the boundary first, the boundary edge.
    """
    steps: list[tuple[EdgeRef, float]] = []
    current = corner
    for _ in range(len(s.singularity(s.vertex_class_of(corner)).corners)):
        n = len(s.polygon(current.polygon))
        edge = EdgeRef(current.polygon, (current.vertex - 1) % n)
        glued = s.glued(edge)
        if glued is None:
            return None, steps, edge
        other, chart_map = glued
        steps.append((edge, chart_map.a))
        current = Corner(other.polygon, other.edge_index)
        if in_corner_sector(s, current, theta):
            return current, steps, None
    return None, steps, None


def _run(
    s: Surface,
    polygon_id: int,
    z: complex,
    direction: DirectionAngle,
    cfg: TraceConfig,
    *,
    skip: Collection[int] = (),
    stop_edges: Collection[EdgeRef] = (),
    max_crossings: int | None = None,
    detect_cycles: bool = True,
) -> _Run:
    run = _Run()
    u = direction.unit
    budget = max_crossings or cfg.max_crossings
    acc = 1.0
    pid = polygon_id
    skip_edges = set(skip)

    while True:
        poly = s.polygon(pid)
        table = s.edge_table[pid]
        eps_abs = cfg.eps_hit * poly.diameter
        t_min = _T_MIN * poly.diameter

        best: tuple[int, float, float] | None = None
        for j, (p0, w, length) in enumerate(table):
            if j in skip_edges:
                continue
            denom = cross(u, w)
            if abs(denom) <= _PARALLEL * length:
                continue
            d = p0 - z
            t = cross(d, w) / denom
            if t <= t_min:
                continue
            sc = cross(d, u) / denom
            slack = eps_abs / length
            if sc < -slack or sc > 1.0 + slack:
                continue
            if best is None or t < best[1]:
                best = (j, t, sc)

        if best is None:
            logger.warning(
                "Trace lost its exit edge", extra={"polygon": pid, "crossings": len(run.edges)}
            )
            run.outcome = BudgetExhausted("numerical")
            return run

        j, t, sc = best
        exit_point = z + t * u
        run.path.append((pid, z, exit_point))
        run.length += t / acc if acc > 0.0 else float("inf")

        length = table[j][2]
        if sc * length <= eps_abs or (1.0 - sc) * length <= eps_abs:
            vertex = j if sc * length <= eps_abs else (j + 1) % len(poly)
            corner = Corner(pid, vertex)
            run.path[-1] = (pid, z, poly.vertex(vertex))
            if not s.is_regular_corner(corner):
                run.outcome = HitSingularity(s.vertex_class_of(corner), corner)
                return run

            exit_corner, steps, blocked = _pass_vertex(s, corner, direction.theta)
            for edge, a in steps:
                acc *= a
                _record(run, edge, 1.0, acc)
                if _settled(s, run, edge, stop_edges, cfg, budget, direction, detect_cycles):
                    return run
            if blocked is not None:
                run.outcome = CrossedBoundary(blocked, 1.0)
                return run
            if exit_corner is None:
                logger.warning("Trace lost its way around a flat vertex", extra={"corner": tuple(corner)})
                run.outcome = BudgetExhausted("numerical")
                return run
            pid = exit_corner.polygon
            n = len(s.polygon(pid))
            z = s.polygon(pid).vertex(exit_corner.vertex)
            skip_edges = {(exit_corner.vertex - 1) % n, exit_corner.vertex}
            continue

        edge = EdgeRef(pid, j)
        glued = s.glued(edge)
        if glued is None:
            run.outcome = CrossedBoundary(edge, sc)
            return run

        other, chart_map = glued
        acc *= chart_map.a
        _record(run, edge, sc, acc)
        if _settled(s, run, edge, stop_edges, cfg, budget, direction, detect_cycles):
            return run

        pid = other.polygon
        z = s.polygon(pid).point_on_edge(other.edge_index, 1.0 - sc)
        skip_edges = {other.edge_index}


def _record(run: _Run, edge: EdgeRef, coord: float, acc: float) -> None:
    run.edges.append(edge)
    run.coords.append(coord)
    run.ratios.append(acc)


def _settled(
    s: Surface,
    run: _Run,
    edge: EdgeRef,
    stop_edges: Collection[EdgeRef],
    cfg: TraceConfig,
    budget: int,
    direction: DirectionAngle,
    detect_cycles: bool,
) -> bool:
    """Applies the stop rules after a crossing; True when the run is over."""
    if edge in stop_edges or s.partner(edge) in stop_edges:
        run.returned = edge
        return True

    if detect_cycles:
        geodesic = _detect_cycle(run.edges, run.coords, run.ratios, cfg, direction, s.eps_geo)
        if geodesic is not None:
            run.outcome = LimitCycle(geodesic)
            return True

    if len(run.edges) >= budget:
        run.outcome = BudgetExhausted("crossings")
        return True
    if run.length >= cfg.max_path_length:
        run.outcome = BudgetExhausted("path_length")
        return True
    return False


def _to_result(start: FlowPoint, direction: DirectionAngle, run: _Run) -> TraceResult:
    return TraceResult(
        start=start,
        direction=direction,
        crossings=tuple(
            CrossingRecord(edge=e, coord=x, accumulated_ratio=a)
            for e, x, a in zip(run.edges, run.coords, run.ratios)
        ),
        outcome=run.outcome if run.outcome is not None else BudgetExhausted("returned"),
        path=tuple(PathSegment(p, a, b) for p, a, b in run.path),
        length=run.length,
    )


def entry_side(
    s: Surface, edge: EdgeRef, coord: float, direction: DirectionAngle
) -> tuple[int, complex, int] | None:
    """Polygon, point and edge index through which ``direction`` enters the surface at an edge point."""
    poly = s.polygon(edge.polygon)
    w = poly.edge_vector(edge.edge_index)
    side = cross(w, direction.unit)
    if abs(side) <= _PARALLEL * abs(w):
        return None
    if side > 0.0:
        return edge.polygon, poly.point_on_edge(edge.edge_index, coord), edge.edge_index
    other = s.partner(edge)
    if other is None:
        return None
    return other.polygon, s.polygon(other.polygon).point_on_edge(other.edge_index, 1.0 - coord), other.edge_index


def trace_from_edge(
    s: Surface,
    edge: EdgeRef,
    coord: float,
    d: DirectionAngle,
    cfg: TraceConfig,
    *,
    detect_cycles: bool = True,
) -> TraceResult:
    """Trace from a point of an edge, entering whichever side ``d`` points into."""
    if not s.has_edge(edge) or not 0.0 <= coord <= 1.0:
        raise InvalidStartException(detail=f"Edge point {tuple(edge)}@{coord} out of range")
    entry = entry_side(s, edge, coord, d)
    if entry is None:
        raise InvalidStartException(
            detail=f"Direction {d.theta} is parallel to or leaves the surface at edge {tuple(edge)}"
        )
    pid, z, skip = entry
    run = _run(s, pid, z, d, cfg, skip=(skip,), detect_cycles=detect_cycles)
    return _to_result(FlowPoint(pid, z), d, run)


def trace_separatrix(
    s: Surface,
    corner: Corner,
    d: DirectionAngle,
    cfg: TraceConfig,
    *,
    detect_cycles: bool = True,
) -> TraceResult:
    """Trace the separatrix leaving a polygon corner in direction ``d``."""
    if not in_corner_sector(s, corner, d.theta) and s.is_regular_corner(corner):
        exit_corner, _, _ = _pass_vertex(s, corner, d.theta)
        corner = exit_corner or corner
    if not in_corner_sector(s, corner, d.theta):
        raise InvalidStartException(
            detail=f"Direction {d.theta} does not leave corner {tuple(corner)}"
        )
    poly = s.polygon(corner.polygon)
    n = len(poly)
    run = _run(
        s,
        corner.polygon,
        poly.vertex(corner.vertex),
        d,
        cfg,
        skip=((corner.vertex - 1) % n, corner.vertex),
        detect_cycles=detect_cycles,
    )
    return _to_result(FlowPoint(corner.polygon, poly.vertex(corner.vertex)), d, run)


def trace(
    s: Surface,
    start: FlowPoint,
    d: DirectionAngle,
    cfg: TraceConfig | None = None,
    *,
    detect_cycles: bool = True,
) -> TraceResult:
    """
    Follows the straight-line flow from ``start`` in direction ``d``.

    Terminates on the first of: singularity hit (within ``eps_hit`` of a
    vertex), boundary crossing, confirmed limit cycle, or exhausted budget.
    Starts on an edge or at a vertex are delegated to ``trace_from_edge`` and
    ``trace_separatrix``.
    """
    cfg = cfg or TraceConfig()
    try:
        poly = s.polygon(start.polygon)
    except KeyError as exc:
        raise InvalidStartException(detail=f"Unknown polygon {start.polygon}") from exc

    z = complex(start.position)
    eps_abs = cfg.eps_hit * poly.diameter
    for i in range(len(poly)):
        if abs(z - poly.vertex(i)) <= eps_abs:
            return trace_separatrix(s, Corner(poly.id, i), d, cfg, detect_cycles=detect_cycles)

    shape = ShapelyPolygon([(v.real, v.imag) for v in poly.vertices])
    point = Point(z.real, z.imag)
    if shape.exterior.distance(point) <= eps_abs:
        for i in range(len(poly)):
            coord = poly.edge_coordinate(i, z)
            if 0.0 <= coord <= 1.0 and abs(poly.point_on_edge(i, coord) - z) <= eps_abs:
                return trace_from_edge(
                    s, EdgeRef(poly.id, i), coord, d, cfg, detect_cycles=detect_cycles
                )
    if not shape.contains(point):
        raise InvalidStartException(
            detail=f"Start {z} lies outside polygon {poly.id}"
        )

    run = _run(s, poly.id, z, d, cfg, detect_cycles=detect_cycles)
    return _to_result(FlowPoint(poly.id, z), d, run)


def first_return(
    s: Surface,
    section: EdgeRef,
    coord: float,
    d: DirectionAngle,
    cfg: TraceConfig,
) -> tuple[tuple[EdgeRef, ...], float, float] | str:
    """
    Follows the flow from a point of ``section`` until it crosses the section again.

    Returns (signature, return coordinate on ``section``, holonomy ratio), or a
    failure tag ("singularity", "boundary", "budget", "entry").
    """
    entry = entry_side(s, section, coord, d)
    if entry is None:
        return "entry"
    pid, z, skip = entry
    partner = s.partner(section)
    stops = {section} if partner is None else {section, partner}
    run = _run(
        s,
        pid,
        z,
        d,
        cfg,
        skip=(skip,),
        stop_edges=stops,
        max_crossings=cfg.max_return_crossings,
        detect_cycles=False,
    )
    if run.returned is None:
        if isinstance(run.outcome, HitSingularity):
            return "singularity"
        if isinstance(run.outcome, CrossedBoundary):
            return "boundary"
        return "budget"

    x = run.coords[-1]
    if run.returned != section:
        x = 1.0 - x
    return tuple(run.edges), x, run.ratios[-1]


def reverse_crossings(
    s: Surface, crossings: Sequence[CrossingRecord]
) -> list[CrossingRecord]:
    """Crossing list of the same path traversed backward.

    The k-th backward crossing carries the ratio A_{n-k} / A_n of the forward
    accumulated ratios, with A_0 = 1.
    """
    ratios = [1.0, *(record.accumulated_ratio for record in crossings)]
    final = ratios[-1]
    n = len(crossings)
    reversed_records = []
    for k, record in enumerate(reversed(crossings), start=1):
        other = s.partner(record.edge)
        if other is None:
            continue
        reversed_records.append(
            CrossingRecord(other, 1.0 - record.coord, ratios[n - k] / final)
        )
    return reversed_records
