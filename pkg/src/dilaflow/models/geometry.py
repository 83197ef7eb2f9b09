"""Planar primitives shared by every chart of a surface."""
import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Reduce an angle to [0, 2π)."""
    reduced = math.fmod(theta, TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    if reduced >= TWO_PI:
        reduced = 0.0
    return reduced


def cross(u: complex, v: complex) -> float:
    """z-component of the planar cross product u × v."""
    return u.real * v.imag - u.imag * v.real


class EdgeRef(NamedTuple):
    """Edge ``edge_index`` of a polygon, from vertex i to vertex i+1 (mod n)."""

    polygon: int
    edge_index: int


class Corner(NamedTuple):
    polygon: int
    vertex: int


@dataclass(frozen=True, slots=True)
class PlanarPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("PlanarPoint coordinates must be finite")

    @classmethod
    def from_complex(cls, z: complex) -> "PlanarPoint":
        return cls(z.real, z.imag)

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True, slots=True)
class DirectionAngle:
    """A direction of the flow, globally defined since all linear parts are positive."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def unit(self) -> complex:
        return cmath.exp(1j * self.theta)

    def reversed(self) -> "DirectionAngle":
        return DirectionAngle(self.theta + math.pi)

    def rotated(self, delta: float) -> "DirectionAngle":
        return DirectionAngle(self.theta + delta)


@dataclass(frozen=True, slots=True)
class AffineMap:
    """z ↦ a·z + b with a > 0."""

    a: float = 1.0
    b: complex = 0j

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"AffineMap linear part must be positive, got {self.a}")

    def __call__(self, z: complex) -> complex:
        return self.a * z + self.b

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Return self ∘ inner."""
        return AffineMap(self.a * inner.a, self.a * inner.b + self.b)

    def inverse(self) -> "AffineMap":
        return AffineMap(1.0 / self.a, -self.b / self.a)

    def is_identity(self, tol: float, scale: float = 1.0) -> bool:
        return abs(self.a - 1.0) <= tol and abs(self.b) <= tol * scale

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls()


@dataclass(frozen=True)
class Polygon:
    """Counterclockwise polygon realising one chart domain."""

    id: int
    vertices: tuple[complex, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def vertex(self, i: int) -> complex:
        return self.vertices[i % len(self.vertices)]

    def edge_start(self, i: int) -> complex:
        return self.vertex(i)

    def edge_end(self, i: int) -> complex:
        return self.vertex(i + 1)

    def edge_vector(self, i: int) -> complex:
        return self.vertex(i + 1) - self.vertex(i)

    def edge_length(self, i: int) -> float:
        return abs(self.edge_vector(i))

    def point_on_edge(self, i: int, coord: float) -> complex:
        return self.vertex(i) + coord * self.edge_vector(i)

    def edge_coordinate(self, i: int, z: complex) -> float:
        """Barycentric coordinate of the projection of z on edge i."""
        w = self.edge_vector(i)
        return ((z - self.vertex(i)) * w.conjugate()).real / (abs(w) ** 2)

    @cached_property
    def signed_area(self) -> float:
        n = len(self.vertices)
        return 0.5 * sum(cross(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    @cached_property
    def diameter(self) -> float:
        pts = self.vertices
        return max(abs(p - q) for p in pts for q in pts)

    def interior_angle(self, i: int) -> float:
        """Interior angle at vertex i, in (0, 2π)."""
        outgoing = self.edge_vector(i)
        incoming_reversed = -self.edge_vector(i - 1)
        return normalize_angle(cmath.phase(incoming_reversed) - cmath.phase(outgoing)) or TWO_PI

    def outgoing_angle(self, i: int) -> float:
        """Direction of edge i, the lower end of the corner sector at vertex i."""
        return normalize_angle(cmath.phase(self.edge_vector(i)))
