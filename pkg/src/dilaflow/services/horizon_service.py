import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field, replace

import numpy as np
from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon

from .. import config
from ..models.flow import FlowPoint, TraceConfig, TraceResult
from ..models.geometry import Corner, DirectionAngle, EdgeRef, cross
from ..models.horizon import CrossingBoundEstimate, HorizonReport, OpennessProbe, Pencil, SampleBudget
from ..models.periodic import SaddleConnection
from ..models.surface import Surface
from ..schemas import PolygonSpec, SurfaceFile
from ..utils.custom_exceptions import (
    HorizonCertificateViolationException,
    NoCrossingFoundException,
    NotASaddleConnectionException,
    ParamOutOfRangeException,
    UnstableCrossingBoundException,
)
from .saddle_service import verify_saddle_connection
from .surface_service import in_corner_sector, validate
from .tracer_service import trace, trace_from_edge, trace_separatrix

logger = logging.getLogger(__name__)

_PROPER = 1e-12


# Cutting ----------------------------------------------------------------------


@dataclass
class _Net:
    """Mutable polygon net with edges named by labels, so splits keep pairings intact."""

    vertices: dict[int, list[complex]]
    labels: dict[int, list[int]]
    partner: dict[int, int]
    # original polygon id -> current sub-polygon ids
    parts: dict[int, list[int]]
    next_label: int = 0
    next_polygon: int = 0
    tol: float = 1e-9

    @classmethod
    def of(cls, s: Surface) -> "_Net":
        label = {edge: k for k, edge in enumerate(s.edges())}
        net = cls(
            vertices={p.id: list(p.vertices) for p in s.polygons},
            labels={p.id: [label[EdgeRef(p.id, i)] for i in range(len(p))] for p in s.polygons},
            partner={
                label[edge]: label[s.partner(edge)] for edge in s.edges() if s.is_paired(edge)
            },
            parts={p.id: [p.id] for p in s.polygons},
            next_label=len(label),
            next_polygon=max(p.id for p in s.polygons) + 1,
            tol=s.eps_geo * s.diameter,
        )
        return net

    def _fresh_label(self) -> int:
        self.next_label += 1
        return self.next_label - 1

    def owner(self, label: int) -> tuple[int, int]:
        for pid, labels in self.labels.items():
            if label in labels:
                return pid, labels.index(label)
        raise KeyError(label)

    def vertex_index(self, pid: int, z: complex) -> int | None:
        for k, v in enumerate(self.vertices[pid]):
            if abs(v - z) <= self.tol:
                return k
        return None

    def edge_at(self, pid: int, z: complex) -> tuple[int, float] | None:
        verts = self.vertices[pid]
        n = len(verts)
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            w = b - a
            coord = ((z - a) * w.conjugate()).real / abs(w) ** 2
            if 0.0 < coord < 1.0 and abs(a + coord * w - z) <= self.tol:
                return k, coord
        return None

    def _insert(self, pid: int, k: int, coord: float) -> tuple[int, int]:
        verts = self.vertices[pid]
        a, b = verts[k], verts[(k + 1) % len(verts)]
        verts.insert(k + 1, a + coord * (b - a))
        first, second = self._fresh_label(), self._fresh_label()
        self.labels[pid][k : k + 1] = [first, second]
        return first, second

    def split_edge_at(self, pid: int, z: complex) -> None:
        if self.vertex_index(pid, z) is not None:
            return
        located = self.edge_at(pid, z)
        if located is None:
            raise NotASaddleConnectionException(detail=f"Point {z} is not on the boundary of polygon {pid}")
        k, coord = located
        old = self.labels[pid][k]
        other = self.partner.pop(old, None)
        first, second = self._insert(pid, k, coord)
        if other is None:
            return
        del self.partner[other]
        qid, j = self.owner(other)
        other_first, other_second = self._insert(qid, j, 1.0 - coord)
        # start of one edge is glued to the end of its partner
        self.partner[first], self.partner[other_second] = other_second, first
        self.partner[second], self.partner[other_first] = other_first, second

    def part_containing(self, original: int, z: complex) -> int:
        best, best_distance = None, float("inf")
        point = Point(z.real, z.imag)
        for pid in self.parts[original]:
            shape = ShapelyPolygon([(v.real, v.imag) for v in self.vertices[pid]])
            distance = shape.distance(point)
            if distance < best_distance:
                best, best_distance = pid, distance
        return best

    def cut_chord(self, original: int, start: complex, end: complex) -> None:
        pid = self.part_containing(original, 0.5 * (start + end))
        ia, ib = self.vertex_index(pid, start), self.vertex_index(pid, end)
        if ia is None or ib is None:
            raise NotASaddleConnectionException(detail=f"Chord {start}-{end} does not join vertices of polygon {pid}")
        n = len(self.vertices[pid])
        lo, hi = sorted((ia, ib))
        if hi - lo == 1 or (lo == 0 and hi == n - 1):
            k = lo if hi - lo == 1 else hi
            other = self.partner.pop(self.labels[pid][k], None)
            if other is not None:
                del self.partner[other]
            return

        verts, labels = self.vertices.pop(pid), self.labels.pop(pid)
        first, second = self.next_polygon, self.next_polygon + 1
        self.next_polygon += 2
        self.vertices[first] = verts[lo : hi + 1]
        self.labels[first] = labels[lo:hi] + [self._fresh_label()]
        self.vertices[second] = verts[hi:] + verts[: lo + 1]
        self.labels[second] = labels[hi:] + labels[:lo] + [self._fresh_label()]
        self.parts[original] = [p for p in self.parts[original] if p != pid] + [first, second]

    def corner_at(self, original: int, z: complex) -> tuple[int, int] | None:
        for pid in self.parts[original]:
            k = self.vertex_index(pid, z)
            if k is not None:
                return pid, k
        return None

    def to_file(self, marked: list[tuple[int, int]]) -> SurfaceFile:
        renumber = {pid: k for k, pid in enumerate(sorted(self.vertices))}
        where = {
            label: (renumber[pid], k)
            for pid, labels in self.labels.items()
            for k, label in enumerate(labels)
        }
        pairings = sorted(
            {tuple(sorted((where[a], where[b]))) for a, b in self.partner.items()}
        )
        return SurfaceFile(
            polygons=[
                PolygonSpec(id=renumber[pid], vertices=[(z.real, z.imag) for z in self.vertices[pid]])
                for pid in sorted(self.vertices)
            ],
            pairings=[(a, b) for a, b in pairings],
            marked_points=sorted({(renumber[pid], k) for pid, k in marked}),
        )


def cut_along(s: Surface, sc: SaddleConnection, cfg: TraceConfig | None = None) -> Surface:
    """
    Cuts the surface open along a saddle connection.

    Edges met by the connection are split at the meeting points (together with
    their partners), every polygon it runs through is split along the chord
    and the two sides of each chord become boundary edges. The endpoints are
    declared marked points of the cut surface, which may be disconnected.

    Raises:
        NotASaddleConnectionException: when ``sc`` does not re-trace on ``s``
    """
    verify_saddle_connection(s, sc, cfg)
    net = _Net.of(s)

    for i, piece in enumerate(sc.pieces):
        if i > 0:
            net.split_edge_at(piece.polygon, piece.start)
        if i < len(sc.pieces) - 1:
            net.split_edge_at(piece.polygon, piece.end)

    originals = {p.id: p for p in s.polygons}
    for piece in sc.pieces:
        net.cut_chord(piece.polygon, piece.start, piece.end)

    marked: list[tuple[int, int]] = []
    endpoints = [(sc.pieces[0].polygon, sc.pieces[0].start), (sc.pieces[-1].polygon, sc.pieces[-1].end)]
    for corner in s.marked_points:
        endpoints.append((corner.polygon, originals[corner.polygon].vertex(corner.vertex)))
    for original, z in endpoints:
        located = net.corner_at(original, z)
        if located is not None:
            marked.append(located)

    cut = validate(
        net.to_file(marked),
        require_connected=False,
        auto_mark=True,
        eps_geo=s.eps_geo,
        name=f"{s.name}/cut",
    )
    logger.info(
        "Surface cut along saddle connection",
        extra={"sc": sc.id, "components": cut.components, "genus": cut.genus},
    )
    return cut


def is_disconnecting(s: Surface, sc: SaddleConnection, cfg: TraceConfig | None = None) -> tuple[bool, int]:
    cut = cut_along(s, sc, cfg)
    return cut.components > 1, cut.components


# Crossing counts --------------------------------------------------------------


@dataclass(frozen=True)
class _CrossingCounter:
    """Counts transverse crossings of a trace with one saddle connection."""

    edges: frozenset[EdgeRef] = frozenset()
    pieces: dict[int, list[tuple[complex, complex]]] = field(default_factory=dict)

    @classmethod
    def of(cls, s: Surface, sc: SaddleConnection) -> "_CrossingCounter":
        if len(sc.pieces) == 1:
            piece = sc.pieces[0]
            poly = s.polygon(piece.polygon)
            for i in range(len(poly)):
                a, b = poly.edge_start(i), poly.edge_end(i)
                if abs(a - piece.start) + abs(b - piece.end) <= 2.0 * s.edge_eps(poly.id):
                    edge = EdgeRef(poly.id, i)
                    other = s.partner(edge)
                    return cls(edges=frozenset({edge} if other is None else {edge, other}))
        pieces: dict[int, list[tuple[complex, complex]]] = {}
        for piece in sc.pieces:
            pieces.setdefault(piece.polygon, []).append((piece.start, piece.end))
        return cls(pieces=pieces)

    def points(self, s: Surface, result: TraceResult) -> Iterator[FlowPoint]:
        """Crossing points in trace order."""
        if self.edges:
            for record in result.crossings:
                if record.edge in self.edges:
                    poly = s.polygon(record.edge.polygon)
                    yield FlowPoint(poly.id, poly.point_on_edge(record.edge.edge_index, record.coord))
            return
        for segment in result.path:
            for a, b in self.pieces.get(segment.polygon, ()):
                hit = _proper_intersection(segment.start, segment.end, a, b)
                if hit is not None:
                    yield FlowPoint(segment.polygon, hit)

    def count(self, s: Surface, result: TraceResult) -> int:
        return sum(1 for _ in self.points(s, result))


def _proper_intersection(p: complex, q: complex, a: complex, b: complex) -> complex | None:
    r, w = q - p, b - a
    denom = cross(r, w)
    if denom == 0.0:
        return None
    t = cross(a - p, w) / denom
    u = cross(a - p, r) / denom
    if _PROPER < t < 1.0 - _PROPER and _PROPER < u < 1.0 - _PROPER:
        return p + t * r
    return None


def random_interior_point(shape: ShapelyPolygon, rng: np.random.Generator) -> complex:
    minx, miny, maxx, maxy = shape.bounds
    while True:
        x, y = rng.uniform(minx, maxx), rng.uniform(miny, maxy)
        if shape.contains(Point(x, y)):
            return complex(x, y)


@dataclass(frozen=True)
class _Launch:
    """Where a sampled trace started: a polygon point or a singular corner."""

    point: FlowPoint | None = None
    corner: Corner | None = None
    edge: tuple[EdgeRef, float] | None = None

    def run(self, s: Surface, theta: float, cfg: TraceConfig) -> TraceResult | None:
        d = DirectionAngle(theta)
        if self.corner is not None:
            if not in_corner_sector(s, self.corner, d.theta):
                return None
            return trace_separatrix(s, self.corner, d, cfg)
        if self.edge is not None:
            return trace_from_edge(s, self.edge[0], self.edge[1], d, cfg)
        return trace(s, self.point, d, cfg)


def _launches(s: Surface, theta: float, starts_per_polygon: int, rng: np.random.Generator) -> list[_Launch]:
    launches = []
    for poly in s.polygons:
        shape = ShapelyPolygon([(v.real, v.imag) for v in poly.vertices])
        for _ in range(starts_per_polygon):
            launches.append(_Launch(point=FlowPoint(poly.id, random_interior_point(shape, rng))))
    for corner in s.corners():
        if not s.is_regular_corner(corner) and in_corner_sector(s, corner, DirectionAngle(theta).theta):
            launches.append(_Launch(corner=corner))
    return launches


@dataclass
class _Sampled:
    per_direction: dict[float, int]
    best: dict[float, tuple[int, _Launch, TraceResult]]
    traces: int


def _sample(
    s: Surface,
    counter: _CrossingCounter,
    grid: list[float],
    cfg: TraceConfig,
    starts_per_polygon: int,
) -> _Sampled:
    per_direction: dict[float, int] = {}
    best: dict[float, tuple[int, _Launch, TraceResult]] = {}
    traces = 0
    for index, theta in enumerate(grid):
        rng = np.random.default_rng([cfg.seed, index])
        top = 0
        for launch in _launches(s, theta, starts_per_polygon, rng):
            result = launch.run(s, theta, cfg)
            if result is None:
                continue
            traces += 1
            count = counter.count(s, result)
            if count > top or theta not in best:
                top = max(top, count)
                best[theta] = (count, launch, result)
        per_direction[theta] = top
    return _Sampled(per_direction, best, traces)


def empirical_crossing_bound(
    s: Surface,
    sc: SaddleConnection,
    grid: list[float],
    cfg: TraceConfig | None = None,
    *,
    starts_per_polygon: int = 1,
    certify: bool = True,
) -> CrossingBoundEstimate:
    """
    Lower bounds on the number of times trajectories cross ``sc``, per direction.

    Every grid direction launches ``starts_per_polygon`` random interior starts
    per polygon plus all separatrices. Each recorded maximum r > 0 is probed at
    d ± ``OPENNESS_DELTA`` from the same start. When ``certify`` is set and
    cutting along ``sc`` disconnects the surface, the bound 1 is certified and
    any sampled trace exceeding it raises.
    """
    cfg = cfg or TraceConfig()
    counter = _CrossingCounter.of(s, sc)
    sampled = _sample(s, counter, list(grid), cfg, starts_per_polygon)

    probes = []
    delta = config.OPENNESS_DELTA
    for theta, (r, launch, _) in sampled.best.items():
        if r == 0:
            continue
        counts = []
        for shifted in (theta - delta, theta + delta):
            result = launch.run(s, shifted, cfg)
            counts.append(0 if result is None else counter.count(s, result))
        probe = OpennessProbe(direction=theta, r=r, delta=delta, minus_count=counts[0], plus_count=counts[1])
        if not probe.passed:
            logger.warning(
                "Openness probe failed at direction %s: r=%s, counts %s", theta, r, counts
            )
        probes.append(probe)

    global_max = max(sampled.per_direction.values(), default=0)
    certified = None
    if certify:
        disconnecting, _ = is_disconnecting(s, sc, cfg)
        if disconnecting:
            certified = 1
            if global_max > 1:
                raise HorizonCertificateViolationException(global_max)

    return CrossingBoundEstimate(
        saddle_connection=sc.id,
        per_direction=sampled.per_direction,
        global_max=global_max,
        sample_budget=SampleBudget(
            traces=sampled.traces,
            max_crossings=cfg.max_crossings,
            max_path_length=cfg.max_path_length,
        ),
        openness=tuple(probes),
        certified_bound=certified,
    )


# Pencils ----------------------------------------------------------------------


def _apex_launch(s: Surface, counter: _CrossingCounter, result: TraceResult, k: int) -> tuple[FlowPoint, _Launch]:
    if counter.edges:
        hits = [c for c in result.crossings if c.edge in counter.edges]
        record = hits[k - 1]
        poly = s.polygon(record.edge.polygon)
        apex = FlowPoint(poly.id, poly.point_on_edge(record.edge.edge_index, record.coord))
        return apex, _Launch(edge=(record.edge, record.coord))
    apex = list(counter.points(s, result))[k - 1]
    return apex, _Launch(point=apex)


def max_crossing_pencil(
    s: Surface,
    sc: SaddleConnection,
    interval: tuple[float, float],
    cfg: TraceConfig | None = None,
    *,
    directions: int = 8,
    starts_per_polygon: int = 1,
    witnesses: int = 5,
    allow_trivial: bool = True,
) -> Pencil:
    """
    Pencil of trajectories from a point of ``sc`` that never cross ``sc`` again.

    The apex is the last crossing point of a trace realising the maximal sampled
    count k over ``interval``. Backward witnesses from the apex re-cross ``sc``
    at least k - 1 times, so forward ones cannot cross it; the half-width of
    the pencil is halved until every witness agrees.

    Raises:
        UnstableCrossingBoundException: the maximal count grows with the budget
        NoCrossingFoundException: k = 0 and ``allow_trivial`` is false
    """
    cfg = cfg or TraceConfig()
    lo, hi = interval
    if not hi > lo:
        raise ParamOutOfRangeException("interval", interval, "lo < hi")
    counter = _CrossingCounter.of(s, sc)
    grid = [lo + (hi - lo) * (j + 0.5) / directions for j in range(directions)]
    sampled = _sample(s, counter, grid, cfg, starts_per_polygon)
    k = max(sampled.per_direction.values(), default=0)

    if k == 0:
        if not allow_trivial:
            raise NoCrossingFoundException()
        poly = s.polygons[0]
        centroid = ShapelyPolygon([(v.real, v.imag) for v in poly.vertices]).representative_point()
        return Pencil(
            apex=FlowPoint(poly.id, complex(centroid.x, centroid.y)),
            interval=(lo, hi),
            k=0,
            note="no sampled trajectory crosses the saddle connection; any pencil avoids it",
        )

    doubled = replace(cfg, max_crossings=2 * cfg.max_crossings, max_path_length=2.0 * cfg.max_path_length)
    k_high = max(_sample(s, counter, grid, doubled, starts_per_polygon).per_direction.values())
    if k_high > k:
        raise UnstableCrossingBoundException(k, k_high)

    theta = max(sampled.per_direction, key=lambda t: sampled.per_direction[t])
    _, _, best = sampled.best[theta]
    apex, launch = _apex_launch(s, counter, best, k)

    half = min(1e-3, theta - lo, hi - theta)
    for _ in range(30):
        offsets = [half * (2.0 * j / (witnesses - 1) - 1.0) * 0.9 for j in range(witnesses)] if witnesses > 1 else [0.0]
        forward, valid = [], True
        for offset in offsets:
            ahead = launch.run(s, theta + offset, cfg)
            behind = launch.run(s, theta + offset + math.pi, cfg)
            if ahead is None or behind is None:
                valid = False
                break
            if counter.count(s, ahead) != 0 or counter.count(s, behind) < k - 1:
                valid = False
                break
            forward.append(ahead)
        if valid:
            return Pencil(
                apex=apex,
                interval=(theta - half, theta + half),
                witness_traces=tuple(forward),
                k=k,
            )
        half *= 0.5

    logger.warning("Pencil witnesses never validated around direction %s", theta)
    return Pencil(apex=apex, interval=(theta - half, theta + half), k=k, note="witness validation failed")


def horizon_report(
    s: Surface,
    sc: SaddleConnection,
    cfg: TraceConfig | None = None,
    *,
    directions: int = 16,
    starts_per_polygon: int = 1,
    pencil_interval: tuple[float, float] | None = None,
) -> HorizonReport:
    """Cut test, crossing-bound estimate over a uniform grid and, on request, a pencil."""
    if directions < 1:
        raise ParamOutOfRangeException("directions", directions, ">= 1")
    cfg = cfg or TraceConfig()
    disconnecting, components = is_disconnecting(s, sc, cfg)
    grid = [2.0 * math.pi * j / directions for j in range(directions)]
    estimate = empirical_crossing_bound(s, sc, grid, cfg, starts_per_polygon=starts_per_polygon)
    pencil = None
    if pencil_interval is not None:
        pencil = max_crossing_pencil(
            s, sc, pencil_interval, cfg, starts_per_polygon=starts_per_polygon
        )
    return HorizonReport(
        saddle_connection=sc,
        disconnecting=disconnecting,
        components=components,
        estimate=estimate,
        pencil=pencil,
    )
