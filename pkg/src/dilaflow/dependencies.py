import logging
from typing import Annotated

from fastapi import Depends

from . import config
from .models.surface import Surface
from .schemas import CylinderParams, SurfaceFile
from .services.surface_service import validate

logger = logging.getLogger(__name__)

CylinderQuery = Annotated[CylinderParams, Depends()]


def surface_from_request(spec: SurfaceFile) -> Surface:
    """Validates the surface carried by a request body."""
    surface = validate(spec, eps_geo=config.EPS_GEO, name="request")
    logger.debug(
        "Request surface validated",
        extra={"polygons": len(surface.polygons), "genus": surface.genus},
    )
    return surface
