from fastapi import Response
from fastapi.routing import APIRouter

from ..dependencies import CylinderQuery, surface_from_request
from ..models.render import RenderSpec
from ..schemas import SurfaceFile, SurfaceInfoResponse, SurfaceRequest, surface_info_to_response
from ..services import builders
from ..services.io_service import surface_id
from ..services.render_service import render_surface

router = APIRouter(prefix="/surfaces", tags=["surfaces"])


@router.post("/validate", response_model=SurfaceInfoResponse)
def validate_surface(spec: SurfaceFile) -> SurfaceInfoResponse:
    """
    Validates a surface file and reports its topology.

    - **polygons**: counterclockwise simple polygons
    - **pairings**: pairs of ``[polygon, edge]`` references glued by a dilation
    - **marked_points**: optional ``[polygon, vertex]`` corners
    """
    s = surface_from_request(spec)
    return surface_info_to_response(s, surface_id(s))


@router.post("/render", response_class=Response)
def render(request: SurfaceRequest) -> Response:
    """SVG picture of the polygon net with its pairing labels."""
    s = surface_from_request(request.surface)
    return Response(content=render_surface(RenderSpec(surface=s)), media_type="image/svg+xml")


@router.get("/examples/torus", response_model=SurfaceFile)
def example_torus() -> SurfaceFile:
    return builders.torus_file()


@router.get("/examples/cylinder", response_model=SurfaceFile)
def example_cylinder(params: CylinderQuery) -> SurfaceFile:
    """Dilation cylinder of ratio **rho** in (0, 1) and opening angle **alpha**."""
    return builders.dilation_cylinder_file(params.rho, params.alpha)


@router.get("/examples/two-chamber", response_model=SurfaceFile)
def example_two_chamber() -> SurfaceFile:
    return builders.two_chamber_file()
