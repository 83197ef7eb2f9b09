from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from . import config
from .models.flow import (
    BudgetExhausted,
    CrossedBoundary,
    CrossingRecord,
    FlowPoint,
    HitSingularity,
    LimitCycle,
    PathSegment,
    PiecewiseAffineMap,
    TraceConfig,
    TraceOutcome,
    TraceResult,
)
from .models.horizon import CrossingBoundEstimate, HorizonReport, Pencil
from .models.periodic import (
    ClosedGeodesic,
    Cylinder,
    FlatFamily,
    FoundCylinder,
    SaddleConnection,
    VeechVerdict,
)
from .models.surface import Surface
from .models.sweep import DirectionClass, DirectionRecord, MorseSmale, SaddleConnectionDirection, SweepReport

Point = tuple[float, float]
Edge = tuple[int, int]


def _xy(z: complex) -> Point:
    return (z.real + 0.0, z.imag + 0.0)


# Surface file -----------------------------------------------------------------


class PolygonSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    vertices: list[Point] = Field(min_length=3)


class SurfaceFile(BaseModel):
    """On-disk surface: polygons, edge pairings and declared marked points.

    ``pairings`` holds ``[[pid, eidx], [pid, eidx]]`` pairs; ``marked_points``
    holds ``[pid, vertex_index]`` corners. Field order is the canonical key order.
    """

    model_config = ConfigDict(extra="forbid")

    polygons: list[PolygonSpec]
    pairings: list[tuple[Edge, Edge]] = []
    marked_points: list[Edge] = []


# Surface reports --------------------------------------------------------------


class SingularityResponse(BaseModel):
    id: int
    cone_angle: float
    index: int | None
    dilation_ratio: float
    on_boundary: bool
    is_marked: bool
    corners: list[Edge]


class SurfaceInfoResponse(BaseModel):
    name: str
    surface_id: str
    polygons: int
    pairings: int
    genus: int
    components: int
    euler_characteristic: int
    boundary_components: int
    is_closed: bool
    marked_points: int
    index_sum: int
    # None for surfaces with boundary.
    gauss_bonnet: bool | None
    singularities: list[SingularityResponse]


# Traces -----------------------------------------------------------------------


class FlowPointModel(BaseModel):
    polygon: int
    position: Point


class CrossingRecordResponse(BaseModel):
    edge: Edge
    coord: float
    accumulated_ratio: float


class PathSegmentResponse(BaseModel):
    polygon: int
    start: Point
    end: Point


class GeodesicResponse(BaseModel):
    id: str
    signature: list[Edge]
    direction: float
    holonomy: float
    base: CrossingRecordResponse
    is_hyperbolic: bool


class HitSingularityResponse(BaseModel):
    kind: Literal["hit_singularity"] = "hit_singularity"
    singularity: int
    corner: Edge


class CrossedBoundaryResponse(BaseModel):
    kind: Literal["crossed_boundary"] = "crossed_boundary"
    edge: Edge
    coord: float


class LimitCycleResponse(BaseModel):
    kind: Literal["limit_cycle"] = "limit_cycle"
    geodesic: GeodesicResponse


class BudgetExhaustedResponse(BaseModel):
    kind: Literal["budget_exhausted"] = "budget_exhausted"
    reason: str


OutcomeResponse = Annotated[
    Union[HitSingularityResponse, CrossedBoundaryResponse, LimitCycleResponse, BudgetExhaustedResponse],
    Field(discriminator="kind"),
]


class TraceResponse(BaseModel):
    start: FlowPointModel
    direction: float
    crossings: list[CrossingRecordResponse]
    outcome: OutcomeResponse
    path: list[PathSegmentResponse]
    length: float


class TraceCrossingLine(BaseModel):
    kind: Literal["crossing"] = "crossing"
    edge: Edge
    coord: float
    accumulated_ratio: float


class TraceOutcomeLine(BaseModel):
    kind: Literal["outcome"] = "outcome"
    outcome: OutcomeResponse
    crossings: int
    length: float


class BranchResponse(BaseModel):
    domain: tuple[float, float]
    slope: float
    offset: float
    signature: list[Edge]


class GapResponse(BaseModel):
    domain: tuple[float, float]
    reason: str


class ReturnMapResponse(BaseModel):
    section: Edge
    direction: float
    branches: list[BranchResponse]
    gaps: list[GapResponse]


# Periodic structures ----------------------------------------------------------


class FlatFamilyResponse(BaseModel):
    section: Edge
    direction: float
    domain: tuple[float, float]
    signature: list[Edge]


class GeodesicsResponse(BaseModel):
    direction: float
    geodesics: list[GeodesicResponse]
    flat_families: list[FlatFamilyResponse]


class SaddleConnectionResponse(BaseModel):
    id: str
    start_singularity: int
    end_singularity: int
    start_corner: Edge
    signature: list[Edge]
    direction: float
    chart_length: float
    pieces: list[PathSegmentResponse]


class SaddleConnectionsResponse(BaseModel):
    bound: float
    saddle_connections: list[SaddleConnectionResponse]


class CylinderResponse(BaseModel):
    id: str
    core: GeodesicResponse
    direction_interval: tuple[float, float]
    angular_extent: float
    boundary: list[SaddleConnectionResponse]


class CylindersResponse(BaseModel):
    cylinders: list[CylinderResponse]


class VeechResponse(BaseModel):
    verdict: Literal["found_cylinder", "no_large_cylinder_found"]
    cylinder: CylinderResponse | None = None
    budget: int | None = None
    geodesics_examined: int | None = None
    largest_extent: float | None = None


# Horizon ----------------------------------------------------------------------


class DirectionCount(BaseModel):
    direction: float
    k: int


class SampleBudgetResponse(BaseModel):
    traces: int
    max_crossings: int
    max_path_length: float


class OpennessProbeResponse(BaseModel):
    direction: float
    r: int
    delta: float
    minus_count: int
    plus_count: int
    passed: bool


class CrossingBoundResponse(BaseModel):
    saddle_connection: str
    per_direction: list[DirectionCount]
    global_max: int
    sample_budget: SampleBudgetResponse
    openness: list[OpennessProbeResponse]
    openness_passed: bool
    certified_bound: int | None


class PencilResponse(BaseModel):
    apex: FlowPointModel
    interval: tuple[float, float]
    k: int
    note: str | None
    witness_traces: list[TraceResponse]


class HorizonResponse(BaseModel):
    saddle_connection: SaddleConnectionResponse
    disconnecting: bool
    components: int
    estimate: CrossingBoundResponse
    pencil: PencilResponse | None = None


# Sweep ------------------------------------------------------------------------


class DirectionClassResponse(BaseModel):
    kind: Literal["morse_smale", "saddle_connection", "unresolved"]
    geodesic_ids: list[str] | None = None
    connection_id: str | None = None
    max_crossings: int | None = None
    reason: str | None = None


class GeodesicSightingResponse(BaseModel):
    id: str
    direction: float
    holonomy: float


class DirectionRecordResponse(BaseModel):
    theta: float
    cls: DirectionClassResponse
    geodesics: list[GeodesicSightingResponse]


class DensityStatsResponse(BaseModel):
    bins: int
    morse_smale: list[int]
    saddle_connection: list[int]
    unresolved: list[int]
    hyperbolic: list[int]
    nonempty_hyperbolic_bins: int


class SweepReportResponse(BaseModel):
    surface_id: str
    grid: list[float]
    records: list[DirectionRecordResponse]
    hyperbolic_direction_intervals: list[tuple[float, float]]
    density_stats: DensityStatsResponse
    morse_smale_fraction: float
    budget: dict[str, float]


# Requests ---------------------------------------------------------------------


class BudgetRequest(BaseModel):
    max_crossings: int = Field(default=config.MAX_CROSSINGS, gt=0)
    max_path_length: float = Field(default=config.MAX_PATH_LENGTH, gt=0)
    seed: int = 0

    def to_config(self) -> TraceConfig:
        return TraceConfig(
            max_crossings=self.max_crossings,
            max_path_length=self.max_path_length,
            seed=self.seed,
        )


class TraceRequest(BaseModel):
    surface: SurfaceFile
    start: FlowPointModel
    direction: float
    budget: BudgetRequest = BudgetRequest()


class ReturnMapRequest(BaseModel):
    surface: SurfaceFile
    section: Edge
    direction: float
    budget: BudgetRequest = BudgetRequest()


class DirectionRequest(BaseModel):
    surface: SurfaceFile
    direction: float
    budget: BudgetRequest = BudgetRequest()


class SurfaceRequest(BaseModel):
    surface: SurfaceFile
    budget: BudgetRequest = BudgetRequest()


class SaddleConnectionsRequest(BaseModel):
    surface: SurfaceFile
    bound: float = Field(gt=0)


class HorizonRequest(BaseModel):
    surface: SurfaceFile
    saddle_connection: str
    bound: float = Field(default=4.0, gt=0)
    directions: int = Field(default=16, ge=1)
    starts_per_polygon: int = Field(default=1, ge=1)
    pencil_interval: tuple[float, float] | None = None
    budget: BudgetRequest = BudgetRequest()


class SweepRequest(BaseModel):
    surface: SurfaceFile
    n_directions: int = Field(default=100, ge=1)
    budget: BudgetRequest = BudgetRequest()


class CylinderParams(BaseModel):
    rho: float = Field(default=0.5, gt=0, lt=1)
    alpha: float = Field(default=1.0471975511965976, gt=0)


class HealthResponse(BaseModel):
    status: str
    api: str


# Converters -------------------------------------------------------------------


def _edges(edges) -> list[Edge]:
    return [tuple(e) for e in edges]


def surface_info_to_response(s: Surface, surface_id: str) -> SurfaceInfoResponse:
    index_sum = s.index_sum()
    return SurfaceInfoResponse(
        name=s.name,
        surface_id=surface_id,
        polygons=len(s.polygons),
        pairings=len(s.pairings),
        genus=s.genus,
        components=s.components,
        euler_characteristic=s.euler_characteristic,
        boundary_components=len(s.boundary_components),
        is_closed=s.is_closed,
        marked_points=sum(1 for sing in s.singularities if sing.is_marked),
        index_sum=index_sum,
        gauss_bonnet=(index_sum == 2 * s.genus - 2) if s.is_closed else None,
        singularities=[
            SingularityResponse(
                id=sing.id,
                cone_angle=sing.cone_angle,
                index=sing.index,
                dilation_ratio=sing.dilation_ratio,
                on_boundary=sing.on_boundary,
                is_marked=sing.is_marked,
                corners=_edges(sing.corners),
            )
            for sing in s.singularities
        ],
    )


def crossing_to_response(record: CrossingRecord) -> CrossingRecordResponse:
    return CrossingRecordResponse(
        edge=tuple(record.edge), coord=record.coord, accumulated_ratio=record.accumulated_ratio
    )


def segment_to_response(segment: PathSegment) -> PathSegmentResponse:
    return PathSegmentResponse(polygon=segment.polygon, start=_xy(segment.start), end=_xy(segment.end))


def flow_point_to_response(point: FlowPoint) -> FlowPointModel:
    return FlowPointModel(polygon=point.polygon, position=_xy(point.position))


def geodesic_to_response(g: ClosedGeodesic) -> GeodesicResponse:
    return GeodesicResponse(
        id=g.id,
        signature=_edges(g.signature),
        direction=g.direction.theta,
        holonomy=g.holonomy,
        base=crossing_to_response(g.base),
        is_hyperbolic=g.is_hyperbolic,
    )


def outcome_to_response(outcome: TraceOutcome):
    match outcome:
        case HitSingularity(singularity=sid, corner=corner):
            return HitSingularityResponse(singularity=sid, corner=tuple(corner))
        case CrossedBoundary(edge=edge, coord=coord):
            return CrossedBoundaryResponse(edge=tuple(edge), coord=coord)
        case LimitCycle(geodesic=g):
            return LimitCycleResponse(geodesic=geodesic_to_response(g))
        case BudgetExhausted(reason=reason):
            return BudgetExhaustedResponse(reason=reason)
    raise TypeError(f"unknown trace outcome {outcome!r}")


def trace_to_response(result: TraceResult) -> TraceResponse:
    return TraceResponse(
        start=flow_point_to_response(result.start),
        direction=result.direction.theta,
        crossings=[crossing_to_response(c) for c in result.crossings],
        outcome=outcome_to_response(result.outcome),
        path=[segment_to_response(p) for p in result.path],
        length=result.length,
    )


def return_map_to_response(rmap: PiecewiseAffineMap) -> ReturnMapResponse:
    return ReturnMapResponse(
        section=tuple(rmap.section),
        direction=rmap.direction.theta,
        branches=[
            BranchResponse(domain=b.domain, slope=b.slope, offset=b.offset, signature=_edges(b.signature))
            for b in rmap.branches
        ],
        gaps=[GapResponse(domain=g.domain, reason=g.reason) for g in rmap.gaps],
    )


def flat_family_to_response(family: FlatFamily) -> FlatFamilyResponse:
    return FlatFamilyResponse(
        section=tuple(family.section),
        direction=family.direction.theta,
        domain=family.domain,
        signature=_edges(family.signature),
    )


def saddle_connection_to_response(sc: SaddleConnection) -> SaddleConnectionResponse:
    return SaddleConnectionResponse(
        id=sc.id,
        start_singularity=sc.start_singularity,
        end_singularity=sc.end_singularity,
        start_corner=tuple(sc.start_corner),
        signature=_edges(sc.signature),
        direction=sc.direction.theta,
        chart_length=sc.chart_length,
        pieces=[segment_to_response(p) for p in sc.pieces],
    )


def cylinder_to_response(cylinder: Cylinder) -> CylinderResponse:
    return CylinderResponse(
        id=cylinder.id,
        core=geodesic_to_response(cylinder.core),
        direction_interval=cylinder.direction_interval,
        angular_extent=cylinder.angular_extent,
        boundary=[saddle_connection_to_response(sc) for sc in cylinder.boundary],
    )


def veech_to_response(verdict: VeechVerdict) -> VeechResponse:
    if isinstance(verdict, FoundCylinder):
        return VeechResponse(verdict="found_cylinder", cylinder=cylinder_to_response(verdict.cylinder))
    return VeechResponse(
        verdict="no_large_cylinder_found",
        budget=verdict.budget,
        geodesics_examined=verdict.geodesics_examined,
        largest_extent=verdict.largest_extent,
    )


def crossing_bound_to_response(estimate: CrossingBoundEstimate) -> CrossingBoundResponse:
    return CrossingBoundResponse(
        saddle_connection=estimate.saddle_connection,
        per_direction=[
            DirectionCount(direction=theta, k=k) for theta, k in sorted(estimate.per_direction.items())
        ],
        global_max=estimate.global_max,
        sample_budget=SampleBudgetResponse(
            traces=estimate.sample_budget.traces,
            max_crossings=estimate.sample_budget.max_crossings,
            max_path_length=estimate.sample_budget.max_path_length,
        ),
        openness=[
            OpennessProbeResponse(
                direction=p.direction,
                r=p.r,
                delta=p.delta,
                minus_count=p.minus_count,
                plus_count=p.plus_count,
                passed=p.passed,
            )
            for p in estimate.openness
        ],
        openness_passed=estimate.openness_passed,
        certified_bound=estimate.certified_bound,
    )


def pencil_to_response(pencil: Pencil) -> PencilResponse:
    return PencilResponse(
        apex=flow_point_to_response(pencil.apex),
        interval=pencil.interval,
        k=pencil.k,
        note=pencil.note,
        witness_traces=[trace_to_response(t) for t in pencil.witness_traces],
    )


def horizon_to_response(report: HorizonReport) -> HorizonResponse:
    return HorizonResponse(
        saddle_connection=saddle_connection_to_response(report.saddle_connection),
        disconnecting=report.disconnecting,
        components=report.components,
        estimate=crossing_bound_to_response(report.estimate),
        pencil=None if report.pencil is None else pencil_to_response(report.pencil),
    )


def direction_class_to_response(cls: DirectionClass) -> DirectionClassResponse:
    if isinstance(cls, MorseSmale):
        return DirectionClassResponse(kind=cls.kind, geodesic_ids=list(cls.geodesic_ids))
    if isinstance(cls, SaddleConnectionDirection):
        return DirectionClassResponse(kind=cls.kind, connection_id=cls.connection_id)
    return DirectionClassResponse(kind=cls.kind, max_crossings=cls.max_crossings, reason=cls.reason)


def direction_record_to_response(record: DirectionRecord) -> DirectionRecordResponse:
    return DirectionRecordResponse(
        theta=record.theta,
        cls=direction_class_to_response(record.cls),
        geodesics=[
            GeodesicSightingResponse(id=g.id, direction=g.direction, holonomy=g.holonomy)
            for g in record.geodesics
        ],
    )


def sweep_to_response(report: SweepReport) -> SweepReportResponse:
    stats = report.density_stats
    return SweepReportResponse(
        surface_id=report.surface_id,
        grid=list(report.grid),
        records=[direction_record_to_response(r) for r in report.records],
        hyperbolic_direction_intervals=list(report.hyperbolic_direction_intervals),
        density_stats=DensityStatsResponse(
            bins=stats.bins,
            morse_smale=list(stats.morse_smale),
            saddle_connection=list(stats.saddle_connection),
            unresolved=list(stats.unresolved),
            hyperbolic=list(stats.hyperbolic),
            nonempty_hyperbolic_bins=stats.nonempty_hyperbolic_bins,
        ),
        morse_smale_fraction=report.morse_smale_fraction,
        budget=dict(report.budget),
    )


# Published JSON schemas, by CLI name.
SCHEMAS: dict[str, type[BaseModel]] = {
    "surface": SurfaceFile,
    "info": SurfaceInfoResponse,
    "trace": TraceResponse,
    "trace-crossing": TraceCrossingLine,
    "trace-outcome": TraceOutcomeLine,
    "return-map": ReturnMapResponse,
    "geodesics": GeodesicsResponse,
    "cylinders": CylindersResponse,
    "veech": VeechResponse,
    "saddles": SaddleConnectionsResponse,
    "horizon": HorizonResponse,
    "sweep": SweepReportResponse,
}
