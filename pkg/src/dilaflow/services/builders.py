"""Canonical example surfaces."""
import cmath
import logging
import math
from dataclasses import dataclass

from ..models.geometry import EdgeRef
from ..models.surface import Surface
from ..schemas import PolygonSpec, SurfaceFile
from ..utils.custom_exceptions import ParamOutOfRangeException
from .surface_service import validate

logger = logging.getLogger(__name__)

WEDGE_MAX_ANGLE = math.pi / 2


def _xy(z: complex) -> tuple[float, float]:
    return (z.real + 0.0, z.imag + 0.0)


def torus_file() -> SurfaceFile:
    return SurfaceFile(
        polygons=[PolygonSpec(id=0, vertices=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])],
        pairings=[((0, 0), (0, 2)), ((0, 1), (0, 3))],
        marked_points=[(0, 0)],
    )


def build_torus() -> Surface:
    """Unit square with opposite sides glued by translations."""
    return validate(torus_file(), name="torus")


def dilation_cylinder_file(rho: float, alpha: float) -> SurfaceFile:
    if not 0.0 < rho < 1.0:
        raise ParamOutOfRangeException("rho", rho, "(0, 1)")
    if not 0.0 < alpha < 2.0 * math.pi:
        raise ParamOutOfRangeException("alpha", alpha, "(0, 2π)")

    wedges = max(1, math.ceil(alpha / WEDGE_MAX_ANGLE - 1e-12))
    rays = [cmath.exp(1j * alpha * j / wedges) for j in range(wedges + 1)]

    polygons = []
    pairings = []
    for j in range(wedges):
        outer_lo, outer_hi = rays[j], rays[j + 1]
        polygons.append(
            PolygonSpec(
                id=j,
                vertices=[
                    _xy(outer_lo),
                    _xy(outer_hi),
                    _xy(rho * outer_hi),
                    _xy(rho * outer_lo),
                ],
            )
        )
        # outer chord onto inner chord by z -> rho * z
        pairings.append(((j, 0), (j, 2)))
        if j + 1 < wedges:
            pairings.append(((j, 1), (j + 1, 3)))
    return SurfaceFile(polygons=polygons, pairings=pairings)


def build_dilation_cylinder(rho: float, alpha: float) -> Surface:
    """
    Annular sector between radii rho and 1 over angles (0, alpha), outer chord
    glued to inner chord by z ↦ rho·z. Sectors wider than π/2 are split into a
    chain of wedges so every polygon stays convex.
    """
    surface = validate(dilation_cylinder_file(rho, alpha), name=f"cylinder(rho={rho}, alpha={alpha})")
    logger.debug("Built dilation cylinder", extra={"wedges": len(surface.polygons)})
    return surface


@dataclass(frozen=True, slots=True)
class TwoChamberParams:
    """Each chamber is a square of side ``side`` whose opposite sides are glued with ``ratio``."""

    side_a: float = 2.0
    ratio_a: float = 0.5
    side_b: float = 3.0
    ratio_b: float = 1.0 / 3.0
    offset_b: tuple[float, float] = (6.0, 3.0)

    def check(self) -> None:
        for name in ("ratio_a", "ratio_b"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ParamOutOfRangeException(name, value, "(0, 1)")
        for name in ("side_a", "side_b"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ParamOutOfRangeException(name, value, "(0, inf)")


def _chamber(pid: int, origin: complex, side: complex, ratio: float) -> PolygonSpec:
    # Edges a, b, A, B, s with A = -ratio·a, B = -ratio·b and the slit s closing up.
    a = side
    b = 1j * side
    points = [origin]
    for step in (a, b, -ratio * a, -ratio * b):
        points.append(points[-1] + step)
    return PolygonSpec(id=pid, vertices=[_xy(z) for z in points])


def two_chamber_file(params: TwoChamberParams | None = None) -> SurfaceFile:
    params = params or TwoChamberParams()
    params.check()
    first = _chamber(0, 0j, complex(params.side_a, 0.0), params.ratio_a)
    second = _chamber(
        1, complex(*params.offset_b), complex(-params.side_b, 0.0), params.ratio_b
    )
    pairings = [
        ((0, 0), (0, 2)),
        ((0, 1), (0, 3)),
        ((1, 0), (1, 2)),
        ((1, 1), (1, 3)),
        ((0, 4), (1, 4)),
    ]
    return SurfaceFile(polygons=[first, second], pairings=pairings)


def two_chamber_slit() -> EdgeRef:
    """The edge joining the two chambers; its complement is disconnected."""
    return EdgeRef(0, 4)


def build_two_chamber(params: TwoChamberParams | None = None) -> Surface:
    """
    Genus-two surface with one singularity of angle 6π made of two slit
    dilation tori glued along their slits.
    """
    return validate(two_chamber_file(params), name="two_chamber")


BUILDERS = {
    "torus": build_torus,
    "cylinder": build_dilation_cylinder,
    "two-chamber": build_two_chamber,
}
