from fastapi import HTTPException, status


class DilationSurfaceException(HTTPException):
    """Base exception for every domain error raised by dilaflow."""

    def __init__(
        self,
        detail: str = "Invalid dilation surface request",
        status_code: int = status.HTTP_422_UNPROCESSABLE_ENTITY,
    ):
        super().__init__(status_code=status_code, detail=detail)

    def __str__(self) -> str:
        return str(self.detail)


class MalformedSurfaceException(DilationSurfaceException):
    """Polygon or pairing data is structurally wrong."""

    def __init__(self, detail: str = "Malformed surface description"):
        super().__init__(detail=detail)


class SelfIntersectingPolygonException(DilationSurfaceException):
    """Polygon boundary is not a simple counterclockwise curve."""

    def __init__(self, polygon: int, reason: str = "self-intersecting"):
        super().__init__(detail=f"Polygon {polygon} is invalid: {reason}")


class NonParallelEdgesException(DilationSurfaceException):
    """Paired edges are not anti-parallel."""

    def __init__(self, e, f):
        super().__init__(
            detail=f"Paired edges {tuple(e)} and {tuple(f)} are not anti-parallel"
        )


class NegativeRatioException(DilationSurfaceException):
    """Paired edges are parallel with the same orientation."""

    def __init__(self, e, f):
        super().__init__(
            detail=(
                f"Paired edges {tuple(e)} and {tuple(f)} have the same orientation; "
                "the gluing would need a negative ratio"
            )
        )


class DisconnectedSurfaceException(DilationSurfaceException):
    """Edge-pairing adjacency graph is not connected."""

    def __init__(self, components: int):
        super().__init__(
            detail=f"Surface is disconnected ({components} components)"
        )


class BareBoundaryComponentException(DilationSurfaceException):
    """A boundary component carries no singularity."""

    def __init__(self, component: int):
        super().__init__(
            detail=f"Boundary component {component} contains no singularity"
        )


class ParamOutOfRangeException(DilationSurfaceException):
    """Builder parameter outside its admissible range."""

    def __init__(self, name: str, value, valid: str):
        super().__init__(detail=f"Parameter {name}={value} out of range {valid}")


class BrokenChainException(DilationSurfaceException):
    """Consecutive crossings of a path do not share a polygon."""

    def __init__(self, position: int):
        super().__init__(detail=f"Edge path is broken at crossing {position}")


class InvalidStartException(DilationSurfaceException):
    """Trace start point or direction is not admissible."""

    def __init__(self, detail: str = "Invalid trace start"):
        super().__init__(detail=detail)


class SectionParallelToDirectionException(DilationSurfaceException):
    """Return map requested on an edge parallel to the flow."""

    def __init__(self, section):
        super().__init__(
            detail=f"Section {tuple(section)} is parallel to the flow direction"
        )


class NotHyperbolicException(DilationSurfaceException):
    """Cylinder extension requested for a flat closed geodesic."""

    def __init__(self):
        super().__init__(detail="Closed geodesic is not hyperbolic")


class NotASaddleConnectionException(DilationSurfaceException):
    """Segment does not verify as a saddle connection of the surface."""

    def __init__(self, detail: str = "Not a saddle connection of this surface"):
        super().__init__(detail=detail)


class SaddleConnectionNotFoundException(DilationSurfaceException):
    """No saddle connection with the requested id."""

    def __init__(self, sc_id: str):
        super().__init__(
            detail=f"Saddle connection {sc_id} not found",
            status_code=status.HTTP_404_NOT_FOUND,
        )


class NoCrossingFoundException(DilationSurfaceException):
    """No sampled trajectory crosses the saddle connection."""

    def __init__(self, detail: str = "No trajectory crosses the saddle connection"):
        super().__init__(detail=detail, status_code=status.HTTP_409_CONFLICT)


class UnstableCrossingBoundException(DilationSurfaceException):
    """Maximal crossing count keeps growing with the trace budget."""

    def __init__(self, k_low: int, k_high: int):
        super().__init__(
            detail=(
                f"Crossing count grows with budget ({k_low} -> {k_high}); "
                "no stable pencil"
            ),
            status_code=status.HTTP_409_CONFLICT,
        )


class HorizonCertificateViolationException(DilationSurfaceException):
    """A trace crossed a disconnecting saddle connection twice."""

    def __init__(self, count: int):
        super().__init__(
            detail=f"Trace crossed a disconnecting saddle connection {count} times",
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        )


class SurfaceFileException(DilationSurfaceException):
    """Surface or report file cannot be parsed."""

    def __init__(self, detail: str = "Unable to read surface file"):
        super().__init__(detail=detail)
