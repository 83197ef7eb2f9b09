from dataclasses import dataclass
from typing import Union

from ..utils.ids import content_id, rounded
from .flow import CrossingRecord, PathSegment
from .geometry import Corner, DirectionAngle, EdgeRef, normalize_angle


def canonical_rotation(signature: tuple[EdgeRef, ...]) -> tuple[EdgeRef, ...]:
    """Lexicographically least cyclic rotation."""
    if not signature:
        return signature
    n = len(signature)
    return min(signature[i:] + signature[:i] for i in range(n))


@dataclass(frozen=True)
class ClosedGeodesic:
    signature: tuple[EdgeRef, ...]
    direction: DirectionAngle
    # Contracting convention: holonomy <= 1.
    holonomy: float
    base: CrossingRecord
    is_hyperbolic: bool

    @property
    def canonical_signature(self) -> tuple[EdgeRef, ...]:
        return canonical_rotation(self.signature)

    @property
    def id(self) -> str:
        return content_id(
            [[list(e) for e in self.canonical_signature], rounded(self.direction.theta, 6)],
            prefix="g-",
        )


@dataclass(frozen=True)
class FlatFamily:
    """Subinterval of a section made of closed trajectories with trivial holonomy."""

    section: EdgeRef
    direction: DirectionAngle
    domain: tuple[float, float]
    signature: tuple[EdgeRef, ...]

    @property
    def canonical_signature(self) -> tuple[EdgeRef, ...]:
        return canonical_rotation(self.signature)


@dataclass(frozen=True)
class SaddleConnection:
    start_singularity: int
    end_singularity: int
    start_corner: Corner
    signature: tuple[EdgeRef, ...]
    direction: DirectionAngle
    chart_length: float
    pieces: tuple[PathSegment, ...] = ()

    @property
    def id(self) -> str:
        first = self.pieces[0] if self.pieces else None
        anchor = (
            [first.polygon, rounded(first.start.real, 6), rounded(first.start.imag, 6)]
            if first
            else []
        )
        return content_id(
            [
                self.start_singularity,
                self.end_singularity,
                [list(e) for e in self.signature],
                rounded(self.direction.theta, 9),
                rounded(self.chart_length, 6),
                anchor,
            ],
            prefix="sc-",
        )


@dataclass(frozen=True)
class Cylinder:
    core: ClosedGeodesic
    # Unwrapped (lo, hi) with lo < hi; directions are taken mod 2π.
    direction_interval: tuple[float, float]
    angular_extent: float
    boundary: tuple[SaddleConnection, ...] = ()

    def contains_direction(self, theta: float, slack: float = 0.0) -> bool:
        lo, hi = self.direction_interval
        offset = normalize_angle(theta - lo)
        return slack < offset < (hi - lo) - slack

    @property
    def id(self) -> str:
        return content_id([self.core.id, rounded(self.angular_extent, 6)], prefix="cyl-")


@dataclass(frozen=True)
class NoLargeCylinderFound:
    budget: int
    geodesics_examined: int
    largest_extent: float


@dataclass(frozen=True)
class FoundCylinder:
    cylinder: Cylinder


VeechVerdict = Union[NoLargeCylinderFound, FoundCylinder]
