"""Domain models."""
from .geometry import (
    AffineMap,
    Corner,
    DirectionAngle,
    EdgeRef,
    PlanarPoint,
    Polygon,
    normalize_angle,
)
from .surface import EdgePairing, Singularity, Surface
from .flow import (
    BudgetExhausted,
    CrossedBoundary,
    CrossingRecord,
    FlowPoint,
    HitSingularity,
    LimitCycle,
    PiecewiseAffineMap,
    TraceConfig,
    TraceResult,
)
from .periodic import ClosedGeodesic, Cylinder, FlatFamily, SaddleConnection
from .horizon import CrossingBoundEstimate, HorizonReport, OpennessProbe, Pencil, SampleBudget
from .sweep import (
    DensityStats,
    DirectionClass,
    DirectionRecord,
    MorseSmale,
    SaddleConnectionDirection,
    SweepReport,
    Unresolved,
)
from .render import RenderSpec, Viewport

__all__ = [
    "AffineMap",
    "BudgetExhausted",
    "ClosedGeodesic",
    "Corner",
    "CrossedBoundary",
    "CrossingBoundEstimate",
    "CrossingRecord",
    "Cylinder",
    "DensityStats",
    "DirectionAngle",
    "DirectionClass",
    "DirectionRecord",
    "EdgePairing",
    "EdgeRef",
    "FlatFamily",
    "FlowPoint",
    "HorizonReport",
    "HitSingularity",
    "LimitCycle",
    "MorseSmale",
    "OpennessProbe",
    "Pencil",
    "PiecewiseAffineMap",
    "PlanarPoint",
    "Polygon",
    "RenderSpec",
    "SaddleConnection",
    "SaddleConnectionDirection",
    "SampleBudget",
    "Singularity",
    "Surface",
    "SweepReport",
    "TraceConfig",
    "TraceResult",
    "Unresolved",
    "Viewport",
    "normalize_angle",
]
