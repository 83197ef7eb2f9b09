import math
from dataclasses import dataclass, field
from functools import cached_property

from .geometry import AffineMap, Corner, EdgeRef, Polygon


@dataclass(frozen=True, slots=True)
class EdgePairing:
    """Gluing of edge e onto edge f by ``map``; ratio = length(f) / length(e)."""

    e: EdgeRef
    f: EdgeRef
    ratio: float
    map: AffineMap


@dataclass(frozen=True, slots=True)
class Singularity:
    id: int
    corners: tuple[Corner, ...]
    cone_angle: float
    # None marks a boundary singularity.
    index: int | None
    dilation_ratio: float
    on_boundary: bool
    is_marked: bool = False

    @property
    def is_singular(self) -> bool:
        """False for an undeclared flat point: angle 2π (π on the boundary) and ratio 1."""
        if self.is_marked:
            return True
        flat_angle = math.pi if self.on_boundary else 2.0 * math.pi
        return not (
            abs(self.cone_angle - flat_angle) <= 1e-6 * len(self.corners)
            and abs(self.dilation_ratio - 1.0) <= 1e-9
        )


@dataclass(frozen=True, eq=False)
class Surface:
    """Validated dilation surface. Immutable; build it through ``surface_service.validate``."""

    polygons: tuple[Polygon, ...]
    pairings: tuple[EdgePairing, ...]
    singularities: tuple[Singularity, ...]
    boundary_components: tuple[tuple[EdgeRef, ...], ...]
    genus: int
    components: int
    euler_characteristic: int
    marked_points: tuple[Corner, ...] = ()
    eps_geo: float = 1e-9
    name: str = "surface"
    _polygon_by_id: dict[int, Polygon] = field(default_factory=dict, repr=False)
    _crossing: dict[EdgeRef, tuple[EdgeRef, AffineMap]] = field(
        default_factory=dict, repr=False
    )
    _vertex_class: dict[Corner, int] = field(default_factory=dict, repr=False)

    @property
    def is_closed(self) -> bool:
        return not self.boundary_components

    @property
    def diameter(self) -> float:
        return max(p.diameter for p in self.polygons)

    def polygon(self, polygon_id: int) -> Polygon:
        return self._polygon_by_id[polygon_id]

    def has_edge(self, edge: EdgeRef) -> bool:
        poly = self._polygon_by_id.get(edge.polygon)
        return poly is not None and 0 <= edge.edge_index < len(poly)

    def glued(self, edge: EdgeRef) -> tuple[EdgeRef, AffineMap] | None:
        """Partner edge and chart change, or None on the boundary."""
        return self._crossing.get(edge)

    @cached_property
    def edge_table(self) -> dict[int, tuple[tuple[complex, complex, float], ...]]:
        """Per polygon: (start, vector, length) of every edge."""
        return {
            p.id: tuple(
                (p.edge_start(i), p.edge_vector(i), p.edge_length(i)) for i in range(len(p))
            )
            for p in self.polygons
        }

    def partner(self, edge: EdgeRef) -> EdgeRef | None:
        glued = self._crossing.get(edge)
        return glued[0] if glued else None

    def crossing_map(self, edge: EdgeRef) -> AffineMap:
        """Chart change applied when a trajectory leaves through ``edge``."""
        return self._crossing[edge][1]

    def is_paired(self, edge: EdgeRef) -> bool:
        return edge in self._crossing

    def vertex_class_of(self, corner: Corner) -> int:
        return self._vertex_class[corner]

    def singularity(self, singularity_id: int) -> Singularity:
        return self.singularities[singularity_id]

    def is_regular_corner(self, corner: Corner) -> bool:
        """True when the corner sits at a flat point that trajectories pass through."""
        return not self.singularities[self._vertex_class[corner]].is_singular

    def corner_angle(self, corner: Corner) -> float:
        return self.polygon(corner.polygon).interior_angle(corner.vertex)

    def corners(self) -> list[Corner]:
        return [Corner(p.id, i) for p in self.polygons for i in range(len(p))]

    def edges(self) -> list[EdgeRef]:
        return [EdgeRef(p.id, i) for p in self.polygons for i in range(len(p))]

    def canonical_edge(self, edge: EdgeRef) -> EdgeRef:
        """Smaller of an edge and its partner; identifies a glued edge of the surface."""
        other = self.partner(edge)
        return edge if other is None or edge <= other else other

    def index_sum(self) -> int:
        return sum(s.index - 1 for s in self.singularities if s.index is not None)

    def edge_eps(self, polygon_id: int) -> float:
        return self.eps_geo * self.polygon(polygon_id).diameter
