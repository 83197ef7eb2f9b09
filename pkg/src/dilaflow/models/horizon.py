from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .flow import FlowPoint, TraceResult

if TYPE_CHECKING:
    from .periodic import SaddleConnection


@dataclass(frozen=True, slots=True)
class SampleBudget:
    traces: int
    max_crossings: int
    max_path_length: float


@dataclass(frozen=True, slots=True)
class OpennessProbe:
    """Re-run of a trace realising r crossings at d, perturbed to d ± δ."""

    direction: float
    r: int
    delta: float
    minus_count: int
    plus_count: int

    @property
    def passed(self) -> bool:
        return self.minus_count >= self.r and self.plus_count >= self.r


@dataclass(frozen=True)
class CrossingBoundEstimate:
    saddle_connection: str
    # direction theta -> lower bound on k(d)
    per_direction: dict[float, int]
    global_max: int
    sample_budget: SampleBudget
    openness: tuple[OpennessProbe, ...] = ()
    certified_bound: int | None = None

    @property
    def openness_passed(self) -> bool:
        return all(p.passed for p in self.openness)


@dataclass(frozen=True)
class Pencil:
    apex: FlowPoint
    interval: tuple[float, float]
    witness_traces: tuple[TraceResult, ...] = field(default=())
    k: int = 0
    note: str | None = None


@dataclass(frozen=True)
class HorizonReport:
    """Everything the horizon analysis says about one saddle connection."""

    saddle_connection: "SaddleConnection"
    disconnecting: bool
    components: int
    estimate: CrossingBoundEstimate
    pencil: Pencil | None = None
