from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, slots=True)
class MorseSmale:
    geodesic_ids: tuple[str, ...]
    kind: str = "morse_smale"


@dataclass(frozen=True, slots=True)
class SaddleConnectionDirection:
    connection_id: str
    kind: str = "saddle_connection"


@dataclass(frozen=True, slots=True)
class Unresolved:
    max_crossings: int
    reason: str = "budget"
    kind: str = "unresolved"


DirectionClass = Union[MorseSmale, SaddleConnectionDirection, Unresolved]


@dataclass(frozen=True, slots=True)
class GeodesicSighting:
    """A hyperbolic closed geodesic met while classifying a direction."""

    id: str
    direction: float
    holonomy: float


@dataclass(frozen=True)
class DirectionRecord:
    theta: float
    cls: DirectionClass
    geodesics: tuple[GeodesicSighting, ...] = ()

    @property
    def has_hyperbolic(self) -> bool:
        return bool(self.geodesics)


@dataclass(frozen=True)
class DensityStats:
    bins: int
    morse_smale: tuple[int, ...]
    saddle_connection: tuple[int, ...]
    unresolved: tuple[int, ...]
    hyperbolic: tuple[int, ...]

    @property
    def nonempty_hyperbolic_bins(self) -> int:
        return sum(1 for count in self.hyperbolic if count > 0)


@dataclass(frozen=True)
class SweepReport:
    surface_id: str
    grid: tuple[float, ...]
    records: tuple[DirectionRecord, ...]
    hyperbolic_direction_intervals: tuple[tuple[float, float], ...]
    density_stats: DensityStats
    budget: dict[str, float]

    @property
    def morse_smale_fraction(self) -> float:
        if not self.records:
            return 0.0
        hits = sum(1 for r in self.records if isinstance(r.cls, MorseSmale))
        return hits / len(self.records)
