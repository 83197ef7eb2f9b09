from fastapi.routing import APIRouter

from ..dependencies import surface_from_request
from ..schemas import HorizonRequest, HorizonResponse, horizon_to_response
from ..services.horizon_service import horizon_report
from ..services.saddle_service import find_saddle_connection

router = APIRouter(prefix="/horizon", tags=["horizon"])


@router.post("/", response_model=HorizonResponse)
def horizon(request: HorizonRequest) -> HorizonResponse:
    """
    Crossing-count analysis of one saddle connection.

    - **saddle_connection**: id as listed by ``/periodic/saddle-connections``
    - **bound**: chart-length bound used to look the id up
    - **directions**: size of the uniform direction grid
    - **pencil_interval**: optional direction interval to build a pencil in
    """
    s = surface_from_request(request.surface)
    cfg = request.budget.to_config()
    sc = find_saddle_connection(s, request.saddle_connection, request.bound, cfg)
    report = horizon_report(
        s,
        sc,
        cfg,
        directions=request.directions,
        starts_per_polygon=request.starts_per_polygon,
        pencil_interval=request.pencil_interval,
    )
    return horizon_to_response(report)
