from fastapi.routing import APIRouter

from ..dependencies import surface_from_request
from ..schemas import SweepReportResponse, SweepRequest, sweep_to_response
from ..services.sweep_service import sweep

router = APIRouter(prefix="/sweep", tags=["sweep"])


@router.post("/", response_model=SweepReportResponse)
def sweep_directions(request: SweepRequest) -> SweepReportResponse:
    """Classifies **n_directions** uniformly spaced directions of the circle."""
    s = surface_from_request(request.surface)
    report = sweep(s, request.n_directions, request.budget.to_config(), workers=1)
    return sweep_to_response(report)
