import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from .. import config
from ..models.flow import BudgetExhausted, FlowPoint, HitSingularity, LimitCycle, TraceConfig
from ..models.geometry import TWO_PI, DirectionAngle
from ..models.sweep import (
    DensityStats,
    DirectionClass,
    DirectionRecord,
    GeodesicSighting,
    MorseSmale,
    SaddleConnectionDirection,
    SweepReport,
    Unresolved,
)
from ..models.surface import Surface
from ..utils.custom_exceptions import ParamOutOfRangeException
from .horizon_service import random_interior_point
from .io_service import surface_id
from .saddle_service import connection_from_trace
from .surface_service import in_corner_sector
from .tracer_service import trace, trace_separatrix

logger = logging.getLogger(__name__)

DENSITY_BINS = 100


def _sight(sightings: dict[str, GeodesicSighting], outcome) -> None:
    if isinstance(outcome, LimitCycle):
        g = outcome.geodesic
        sightings.setdefault(g.id, GeodesicSighting(g.id, g.direction.theta, g.holonomy))


def inspect_direction(s: Surface, theta: float, cfg: TraceConfig) -> DirectionRecord:
    """Classifies one direction and keeps the hyperbolic geodesics met on the way."""
    d = DirectionAngle(theta)
    sightings: dict[str, GeodesicSighting] = {}
    connection = None
    exhausted: str | None = None

    for phi in (d, d.reversed()):
        for corner in s.corners():
            if s.is_regular_corner(corner) or not in_corner_sector(s, corner, phi.theta):
                continue
            result = trace_separatrix(s, corner, phi, cfg)
            outcome = result.outcome
            if isinstance(outcome, HitSingularity) and result.length > 0.0:
                if connection is None:
                    connection = connection_from_trace(s, corner, result)
            elif isinstance(outcome, BudgetExhausted):
                exhausted = exhausted or outcome.reason
            _sight(sightings, outcome)

    cls: DirectionClass
    if connection is not None:
        cls = SaddleConnectionDirection(connection.id)
    elif exhausted is not None:
        cls = Unresolved(cfg.max_crossings, exhausted)
    else:
        cls = _spot_check(s, d, cfg, sightings)

    return DirectionRecord(
        theta=d.theta,
        cls=cls,
        geodesics=tuple(sorted(sightings.values(), key=lambda g: g.id)),
    )


def _spot_check(
    s: Surface, d: DirectionAngle, cfg: TraceConfig, sightings: dict[str, GeodesicSighting]
) -> DirectionClass:
    # Same starts for d and d + π, so both directions get the same verdict.
    rng = np.random.default_rng(cfg.seed)
    shapes = [ShapelyPolygon([(v.real, v.imag) for v in p.vertices]) for p in s.polygons]
    for j in range(max(1, cfg.probe_count // 2)):
        index = j % len(s.polygons)
        start = FlowPoint(s.polygons[index].id, random_interior_point(shapes[index], rng))
        for phi in (d, d.reversed()):
            outcome = trace(s, start, phi, cfg).outcome
            if isinstance(outcome, BudgetExhausted):
                logger.warning(
                    "Direction %s demoted: probe trajectory exhausted its budget", d.theta
                )
                return Unresolved(cfg.max_crossings, "probe")
            _sight(sightings, outcome)
    return MorseSmale(tuple(sorted(sightings)))


def classify_direction(s: Surface, d: DirectionAngle, cfg: TraceConfig | None = None) -> DirectionClass:
    """
    Morse-Smale, saddle-connection or unresolved verdict for direction ``d``.

    Every separatrix in ``d`` and ``d + π`` is traced. One that ends at a
    singularity makes ``d`` a saddle-connection direction; one that runs out
    of budget leaves it unresolved. When all of them end on a limit cycle or
    the boundary, random probe trajectories are traced as a guard before the
    direction is declared Morse-Smale.
    """
    return inspect_direction(s, d.theta, cfg or TraceConfig()).cls


def _classify_all(s: Surface, thetas: list[float], cfg: TraceConfig, workers: int) -> list[DirectionRecord]:
    task = partial(inspect_direction, s, cfg=cfg)
    if workers <= 1 or len(thetas) < 2:
        return [task(theta) for theta in thetas]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(task, thetas, chunksize=max(1, len(thetas) // (4 * workers))))


def _lambdas(record: DirectionRecord) -> set[float]:
    return {round(g.holonomy, 9) for g in record.geodesics}


def hyperbolic_intervals(records: list[DirectionRecord]) -> list[tuple[float, float]]:
    """Runs of consecutive directions whose geodesics share a holonomy ratio."""
    intervals: list[tuple[float, float]] = []
    run_start: DirectionRecord | None = None
    previous: DirectionRecord | None = None
    for record in records:
        if not record.geodesics:
            if run_start is not None:
                intervals.append((run_start.theta, previous.theta))
            run_start = None
        elif run_start is None or not (_lambdas(previous) & _lambdas(record)):
            if run_start is not None:
                intervals.append((run_start.theta, previous.theta))
            run_start = record
        previous = record
    if run_start is not None:
        intervals.append((run_start.theta, previous.theta))
    return intervals


def density_stats(records: list[DirectionRecord], bins: int = DENSITY_BINS) -> DensityStats:
    counts = {kind: [0] * bins for kind in ("morse_smale", "saddle_connection", "unresolved")}
    hyperbolic = [0] * bins
    for record in records:
        index = min(int(record.theta / TWO_PI * bins), bins - 1)
        counts[record.cls.kind][index] += 1
        if record.has_hyperbolic:
            hyperbolic[index] += 1
    return DensityStats(
        bins=bins,
        morse_smale=tuple(counts["morse_smale"]),
        saddle_connection=tuple(counts["saddle_connection"]),
        unresolved=tuple(counts["unresolved"]),
        hyperbolic=tuple(hyperbolic),
    )


def sweep(
    s: Surface,
    n_directions: int,
    cfg: TraceConfig | None = None,
    *,
    workers: int = config.SWEEP_WORKERS,
    bins: int = DENSITY_BINS,
    refine: bool = True,
) -> SweepReport:
    """
    Classifies a uniform grid of ``n_directions`` directions of the circle.

    Between neighbouring grid directions of different class one midpoint is
    classified as well. The result depends only on the surface, the grid and
    ``cfg`` (its seed included), not on the number of workers.
    """
    if n_directions < 1:
        raise ParamOutOfRangeException("n_directions", n_directions, ">= 1")
    cfg = cfg or TraceConfig()

    thetas = [TWO_PI * k / n_directions for k in range(n_directions)]
    records = _classify_all(s, thetas, cfg, workers)

    if refine and n_directions > 1:
        half_step = math.pi / n_directions
        midpoints = [
            thetas[k] + half_step
            for k in range(n_directions)
            if records[k].cls.kind != records[(k + 1) % n_directions].cls.kind
        ]
        if midpoints:
            logger.debug("Refining sweep", extra={"midpoints": len(midpoints)})
            records = sorted(
                records + _classify_all(s, midpoints, cfg, workers), key=lambda r: r.theta
            )

    report = SweepReport(
        surface_id=surface_id(s),
        grid=tuple(r.theta for r in records),
        records=tuple(records),
        hyperbolic_direction_intervals=tuple(hyperbolic_intervals(records)),
        density_stats=density_stats(records, bins),
        budget={
            "max_crossings": cfg.max_crossings,
            "max_path_length": cfg.max_path_length,
            "seed": cfg.seed,
            "probe_count": cfg.probe_count,
            "n_directions": n_directions,
        },
    )
    logger.info(
        "Sweep finished",
        extra={"directions": len(records), "morse_smale": report.morse_smale_fraction},
    )
    return report
