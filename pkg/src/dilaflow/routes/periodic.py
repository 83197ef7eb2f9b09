from fastapi.routing import APIRouter

from ..dependencies import surface_from_request
from ..models.geometry import DirectionAngle
from ..schemas import (
    CylindersResponse,
    DirectionRequest,
    GeodesicsResponse,
    SaddleConnectionsRequest,
    SaddleConnectionsResponse,
    SurfaceRequest,
    VeechResponse,
    cylinder_to_response,
    flat_family_to_response,
    geodesic_to_response,
    saddle_connection_to_response,
    veech_to_response,
)
from ..services.periodic_service import (
    closed_geodesics_in_direction,
    cylinders_in_direction,
    flat_families_in_direction,
    veech_criterion,
)
from ..services.saddle_service import enumerate_saddle_connections

router = APIRouter(prefix="/periodic", tags=["periodic"])


@router.post("/geodesics", response_model=GeodesicsResponse)
def geodesics(request: DirectionRequest) -> GeodesicsResponse:
    """Hyperbolic closed geodesics and flat families parallel to **direction**."""
    s = surface_from_request(request.surface)
    d = DirectionAngle(request.direction)
    cfg = request.budget.to_config()
    return GeodesicsResponse(
        direction=d.theta,
        geodesics=[geodesic_to_response(g) for g in closed_geodesics_in_direction(s, d, cfg)],
        flat_families=[flat_family_to_response(f) for f in flat_families_in_direction(s, d, cfg)],
    )


@router.post("/cylinders", response_model=CylindersResponse)
def cylinders(request: DirectionRequest) -> CylindersResponse:
    s = surface_from_request(request.surface)
    found = cylinders_in_direction(s, DirectionAngle(request.direction), request.budget.to_config())
    return CylindersResponse(cylinders=[cylinder_to_response(c) for c in found])


@router.post("/veech", response_model=VeechResponse)
def veech(request: SurfaceRequest) -> VeechResponse:
    """Looks for a hyperbolic cylinder of angle at least π."""
    s = surface_from_request(request.surface)
    return veech_to_response(veech_criterion(s, request.budget.to_config()))


@router.post("/saddle-connections", response_model=SaddleConnectionsResponse)
def saddle_connections(request: SaddleConnectionsRequest) -> SaddleConnectionsResponse:
    s = surface_from_request(request.surface)
    found = enumerate_saddle_connections(s, request.bound)
    return SaddleConnectionsResponse(
        bound=request.bound,
        saddle_connections=[saddle_connection_to_response(sc) for sc in found],
    )
