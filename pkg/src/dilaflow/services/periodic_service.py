import logging
import math

from .. import config
from ..models.flow import CrossingRecord, PiecewiseAffineMap, TraceConfig
from ..models.geometry import TWO_PI, Corner, DirectionAngle, EdgeRef, cross
from ..models.periodic import (
    ClosedGeodesic,
    Cylinder,
    FlatFamily,
    FoundCylinder,
    NoLargeCylinderFound,
    VeechVerdict,
)
from ..models.surface import Surface
from ..utils.custom_exceptions import NotHyperbolicException
from .return_map_service import return_map_on_edge
from .saddle_service import enumerate_saddle_connections

logger = logging.getLogger(__name__)

VEECH_GRID = 64
MAX_PROBE_STEP = math.pi / 8


def _parallel(a: float, b: float, tol: float) -> bool:
    return abs(math.remainder(a - b, math.pi)) < tol


def _sections(s: Surface, d: DirectionAngle) -> list[EdgeRef]:
    """One edge per pairing, skipping edges parallel to ``d``."""
    sections = []
    for pairing in s.pairings:
        poly = s.polygon(pairing.e.polygon)
        w = poly.edge_vector(pairing.e.edge_index)
        if abs(cross(w, d.unit)) > s.eps_geo * abs(w):
            sections.append(pairing.e)
    return sections


def _end_corner(s: Surface, section: EdgeRef, end: float) -> Corner:
    n = len(s.polygon(section.polygon))
    return Corner(section.polygon, section.edge_index if end == 0.0 else (section.edge_index + 1) % n)


def _flat_end(s: Surface, section: EdgeRef, domain: tuple[float, float], fixed: float) -> float | None:
    """Section endpoint holding ``fixed`` when it is a flat vertex closing the branch domain."""
    eps = s.eps_geo
    for end, bound in ((0.0, domain[0]), (1.0, domain[1])):
        if abs(fixed - end) <= eps and abs(bound - end) <= eps:
            return end if s.is_regular_corner(_end_corner(s, section, end)) else None
    return None


def _reverse(s: Surface, g: ClosedGeodesic) -> ClosedGeodesic:
    """Same closed curve traversed backward, closing crossing first."""
    partners = [s.partner(e) for e in g.signature]
    signature = (partners[0],) + tuple(reversed(partners[1:]))
    return ClosedGeodesic(
        signature=signature,
        direction=g.direction.reversed(),
        holonomy=1.0 / g.holonomy,
        base=CrossingRecord(signature[0], 1.0 - g.base.coord, 1.0),
        is_hyperbolic=g.is_hyperbolic,
    )


def _scan(
    s: Surface, d: DirectionAngle, cfg: TraceConfig
) -> tuple[list[ClosedGeodesic], list[FlatFamily]]:
    eps = s.eps_geo
    geodesics: dict[tuple, ClosedGeodesic] = {}
    flats: dict[tuple, FlatFamily] = {}
    for section in _sections(s, d):
        rmap: PiecewiseAffineMap = return_map_on_edge(s, section, d, cfg)
        for branch in rmap.branches:
            if abs(branch.slope - 1.0) <= eps:
                if abs(branch.offset) <= eps:
                    family = FlatFamily(section, d, branch.domain, branch.signature)
                    flats.setdefault(family.canonical_signature, family)
                continue

            fixed = branch.fixed_point
            if fixed is None:
                continue
            flat_end = None
            if not branch.contains(fixed):
                flat_end = _flat_end(s, section, branch.domain, fixed)
                if flat_end is None:
                    continue
                fixed = flat_end

            closing = branch.signature[-1]
            coord = fixed if closing == section else 1.0 - fixed
            g = ClosedGeodesic(
                signature=(closing,) + tuple(branch.signature[:-1]),
                direction=d,
                holonomy=branch.slope,
                base=CrossingRecord(closing, coord, 1.0),
                is_hyperbolic=True,
            )
            if g.holonomy > 1.0:
                g = _reverse(s, g)
            key = (g.canonical_signature, round(g.direction.theta, 9))
            if flat_end is not None:
                # Seen from both sides of the flat vertex it runs through.
                vertex = _end_corner(s, section, flat_end)
                key = ("vertex", s.vertex_class_of(vertex), round(g.direction.theta, 9))
            geodesics.setdefault(key, g)

    ordered = sorted(geodesics.values(), key=lambda g: (g.direction.theta, g.canonical_signature))
    return ordered, list(flats.values())


def closed_geodesics_in_direction(
    s: Surface, d: DirectionAngle, cfg: TraceConfig | None = None
) -> list[ClosedGeodesic]:
    """
    Hyperbolic closed geodesics parallel to ``d``.

    Every return-map branch with slope != 1 whose fixed point lies inside its
    domain gives one geodesic. Geodesics are reported in their contracting
    orientation, so the result covers both ``d`` and ``d + π``.
    """
    geodesics, _ = _scan(s, d, cfg or TraceConfig())
    return geodesics


def flat_families_in_direction(
    s: Surface, d: DirectionAngle, cfg: TraceConfig | None = None
) -> list[FlatFamily]:
    _, flats = _scan(s, d, cfg or TraceConfig())
    return flats


def _vertex_classes_of(s: Surface, signature: tuple[EdgeRef, ...]) -> set[int]:
    classes = set()
    for edge in signature:
        n = len(s.polygon(edge.polygon))
        classes.add(s.vertex_class_of(Corner(edge.polygon, edge.edge_index)))
        classes.add(s.vertex_class_of(Corner(edge.polygon, (edge.edge_index + 1) % n)))
    return classes


def _continuation(
    s: Surface, reference: ClosedGeodesic, theta: float, cfg: TraceConfig
) -> ClosedGeodesic | None:
    """Geodesic at ``theta`` deforming ``reference`` continuously, if one exists."""
    edges = {s.canonical_edge(e) for e in reference.signature}
    classes = _vertex_classes_of(s, reference.signature)
    for g in closed_geodesics_in_direction(s, DirectionAngle(theta), cfg):
        if abs(g.holonomy - reference.holonomy) > config.RATIO_TOLERANCE * reference.holonomy:
            continue
        if abs(math.remainder(g.direction.theta - theta, TWO_PI)) > 1e-9:
            continue
        if edges.intersection(s.canonical_edge(e) for e in g.signature):
            return g
        if classes.intersection(_vertex_classes_of(s, g.signature)):
            return g
    return None


def _reach(s: Surface, g: ClosedGeodesic, side: int, cfg: TraceConfig, cap: float) -> float:
    """Angular distance from ``g.direction`` to the end of its family on one side."""
    theta0 = g.direction.theta
    reference = g
    good = 0.0
    step = config.INITIAL_PROBE_STEP
    bad = None
    while good < cap:
        probe = min(good + step, cap)
        found = _continuation(s, reference, theta0 + side * probe, cfg)
        if found is None:
            bad = probe
            break
        good, reference = probe, found
        step = min(2.0 * step, MAX_PROBE_STEP)
    if bad is None:
        return cap

    while bad - good > config.ANGULAR_TOLERANCE:
        mid = 0.5 * (good + bad)
        found = _continuation(s, reference, theta0 + side * mid, cfg)
        if found is None:
            bad = mid
        else:
            good, reference = mid, found
    return 0.5 * (good + bad)


def extend_to_cylinder(
    s: Surface,
    g: ClosedGeodesic,
    cfg: TraceConfig | None = None,
    *,
    with_boundary: bool = True,
) -> Cylinder:
    """
    Grows a hyperbolic geodesic into its maximal family of parallel-transported
    closed geodesics by stepping the direction outward and bisecting the first
    direction where no continuation exists.

    Raises:
        NotHyperbolicException: for flat closed geodesics
    """
    if not g.is_hyperbolic or abs(g.holonomy - 1.0) <= s.eps_geo:
        raise NotHyperbolicException()
    cfg = cfg or TraceConfig()

    upper = _reach(s, g, +1, cfg, TWO_PI)
    lower = _reach(s, g, -1, cfg, TWO_PI - upper)
    extent = min(upper + lower, TWO_PI)
    theta = g.direction.theta
    interval = (theta - lower, theta + upper)
    logger.debug(
        "Cylinder extended", extra={"geodesic": g.id, "extent": extent}
    )

    boundary = ()
    if with_boundary:
        ends = (interval[0], interval[1])
        boundary = tuple(
            sc
            for sc in enumerate_saddle_connections(s, 4.0 * s.diameter, cfg)
            if any(_parallel(sc.direction.theta, end, 1e-6) for end in ends)
        )
    return Cylinder(core=g, direction_interval=interval, angular_extent=extent, boundary=boundary)


def veech_criterion(
    s: Surface, cfg: TraceConfig | None = None, grid: int = VEECH_GRID
) -> VeechVerdict:
    """
    Searches for a hyperbolic cylinder of angle at least π.

    A negative answer only reports what the direction grid and budgets examined.
    """
    cfg = cfg or TraceConfig()
    examined = 0
    largest = 0.0
    cylinders: list[Cylinder] = []
    for k in range(grid):
        theta = math.pi * k / grid
        for g in closed_geodesics_in_direction(s, DirectionAngle(theta), cfg):
            if any(
                c.contains_direction(g.direction.theta) and abs(c.core.holonomy - g.holonomy) <= 1e-9
                for c in cylinders
            ):
                continue
            examined += 1
            cylinder = extend_to_cylinder(s, g, cfg, with_boundary=False)
            cylinders.append(cylinder)
            largest = max(largest, cylinder.angular_extent)
            if cylinder.angular_extent >= math.pi - s.eps_geo:
                logger.info("Large cylinder found", extra={"extent": cylinder.angular_extent})
                return FoundCylinder(cylinder)

    logger.warning(
        "No cylinder of angle >= π within a grid of %s directions (%s geodesics examined)",
        grid,
        examined,
    )
    return NoLargeCylinderFound(
        budget=grid, geodesics_examined=examined, largest_extent=largest
    )


def cylinders_in_direction(
    s: Surface, d: DirectionAngle, cfg: TraceConfig | None = None, *, with_boundary: bool = True
) -> list[Cylinder]:
    """Maximal hyperbolic cylinders through the closed geodesics parallel to ``d``."""
    cfg = cfg or TraceConfig()
    cylinders: list[Cylinder] = []
    for g in closed_geodesics_in_direction(s, d, cfg):
        if any(
            c.contains_direction(g.direction.theta) and abs(c.core.holonomy - g.holonomy) <= 1e-9
            for c in cylinders
        ):
            continue
        cylinders.append(extend_to_cylinder(s, g, cfg, with_boundary=with_boundary))
    return cylinders
