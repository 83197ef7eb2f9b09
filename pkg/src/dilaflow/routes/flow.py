from fastapi.routing import APIRouter

from ..dependencies import surface_from_request
from ..models.flow import FlowPoint
from ..models.geometry import DirectionAngle, EdgeRef
from ..schemas import (
    DirectionClassResponse,
    DirectionRequest,
    ReturnMapRequest,
    ReturnMapResponse,
    TraceRequest,
    TraceResponse,
    direction_class_to_response,
    return_map_to_response,
    trace_to_response,
)
from ..services.return_map_service import return_map_on_edge
from ..services.sweep_service import classify_direction
from ..services.tracer_service import trace

router = APIRouter(prefix="/flow", tags=["flow"])


@router.post("/trace", response_model=TraceResponse)
def trace_trajectory(request: TraceRequest) -> TraceResponse:
    """
    Follows the straight-line flow from a start point.

    - **start**: polygon id and position; a vertex position starts a separatrix
    - **direction**: angle in radians
    - **budget**: crossing and path-length limits
    """
    s = surface_from_request(request.surface)
    start = FlowPoint(request.start.polygon, complex(*request.start.position))
    result = trace(s, start, DirectionAngle(request.direction), request.budget.to_config())
    return trace_to_response(result)


@router.post("/return-map", response_model=ReturnMapResponse)
def return_map(request: ReturnMapRequest) -> ReturnMapResponse:
    """First-return map of the flow on an edge, as affine branches and gaps."""
    s = surface_from_request(request.surface)
    rmap = return_map_on_edge(
        s, EdgeRef(*request.section), DirectionAngle(request.direction), request.budget.to_config()
    )
    return return_map_to_response(rmap)


@router.post("/classify", response_model=DirectionClassResponse)
def classify(request: DirectionRequest) -> DirectionClassResponse:
    s = surface_from_request(request.surface)
    cls = classify_direction(s, DirectionAngle(request.direction), request.budget.to_config())
    return direction_class_to_response(cls)
