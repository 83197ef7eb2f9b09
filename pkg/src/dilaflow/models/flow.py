from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Union

from .. import config
from .geometry import Corner, DirectionAngle, EdgeRef

if TYPE_CHECKING:
    from .periodic import ClosedGeodesic


@dataclass(frozen=True, slots=True)
class FlowPoint:
    polygon: int
    position: complex


@dataclass(frozen=True, slots=True)
class TraceConfig:
    """Budgets and tolerances of the tracer.

    ``eps_hit`` is relative: the absolute vertex-hit radius in a polygon is
    ``eps_hit * polygon.diameter``.
    """

    max_crossings: int = config.MAX_CROSSINGS
    max_path_length: float = config.MAX_PATH_LENGTH
    eps_hit: float = config.EPS_GEO
    cycle_confirmations: int = config.CYCLE_CONFIRMATIONS
    max_return_crossings: int = 256
    return_samples: int = config.RETURN_SAMPLES
    max_period: int = 64
    seed: int = 0
    probe_count: int = 16

    def __post_init__(self):
        for name in (
            "max_crossings",
            "max_path_length",
            "eps_hit",
            "cycle_confirmations",
            "max_return_crossings",
            "return_samples",
            "max_period",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"TraceConfig.{name} must be positive")

    def with_budget(self, max_crossings: int) -> "TraceConfig":
        return replace(self, max_crossings=max_crossings)


@dataclass(frozen=True, slots=True)
class CrossingRecord:
    edge: EdgeRef
    coord: float
    accumulated_ratio: float


@dataclass(frozen=True, slots=True)
class PathSegment:
    """Straight piece of a trajectory inside one polygon chart."""

    polygon: int
    start: complex
    end: complex


@dataclass(frozen=True, slots=True)
class HitSingularity:
    singularity: int
    corner: Corner


@dataclass(frozen=True, slots=True)
class CrossedBoundary:
    edge: EdgeRef
    coord: float


@dataclass(frozen=True, slots=True)
class LimitCycle:
    geodesic: "ClosedGeodesic"


@dataclass(frozen=True, slots=True)
class BudgetExhausted:
    reason: str = "crossings"


TraceOutcome = Union[HitSingularity, CrossedBoundary, LimitCycle, BudgetExhausted]


@dataclass(frozen=True)
class TraceResult:
    start: FlowPoint
    direction: DirectionAngle
    crossings: tuple[CrossingRecord, ...]
    outcome: TraceOutcome
    path: tuple[PathSegment, ...] = ()
    # Length in the start chart's units.
    length: float = 0.0

    @property
    def end(self) -> FlowPoint:
        if not self.path:
            return self.start
        last = self.path[-1]
        return FlowPoint(last.polygon, last.end)

    @property
    def signature(self) -> tuple[EdgeRef, ...]:
        return tuple(c.edge for c in self.crossings)


@dataclass(frozen=True, slots=True)
class Branch:
    domain: tuple[float, float]
    slope: float
    offset: float
    signature: tuple[EdgeRef, ...]

    def contains(self, x: float) -> bool:
        return self.domain[0] < x < self.domain[1]

    def __call__(self, x: float) -> float:
        return self.slope * x + self.offset

    @property
    def fixed_point(self) -> float | None:
        if self.slope == 1.0:
            return None
        return self.offset / (1.0 - self.slope)


@dataclass(frozen=True, slots=True)
class Gap:
    domain: tuple[float, float]
    reason: str


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """First-return map of the flow on an edge, in the edge's barycentric coordinate."""

    section: EdgeRef
    direction: DirectionAngle
    branches: tuple[Branch, ...]
    gaps: tuple[Gap, ...] = ()

    def branch_at(self, x: float) -> Branch | None:
        for branch in self.branches:
            if branch.contains(x):
                return branch
        return None

    def __call__(self, x: float) -> float | None:
        branch = self.branch_at(x)
        return None if branch is None else branch(x)
