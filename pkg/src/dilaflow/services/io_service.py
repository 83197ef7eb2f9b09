"""Reading and writing of surface files and trace dumps."""
import json
import logging
import sys
from collections.abc import Iterable, Iterator
from pathlib import Path

from pydantic import ValidationError

from .. import config
from ..models.flow import TraceResult
from ..models.surface import Surface
from ..schemas import (
    SurfaceFile,
    TraceCrossingLine,
    TraceOutcomeLine,
    outcome_to_response,
)
from ..utils.custom_exceptions import SurfaceFileException
from ..utils.ids import content_id
from .surface_service import validate

logger = logging.getLogger(__name__)

STDIO = "-"


def read_text(source: str | Path) -> str:
    if str(source) == STDIO:
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise SurfaceFileException(detail=f"Cannot read {source}: {exc.strerror}") from exc


def write_text(target: str | Path, text: str) -> None:
    if str(target) == STDIO:
        sys.stdout.write(text)
        return
    try:
        Path(target).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise SurfaceFileException(detail=f"Cannot write {target}: {exc.strerror}") from exc


def parse_surface_file(text: str) -> SurfaceFile:
    try:
        return SurfaceFile.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise SurfaceFileException(detail=f"Invalid surface file at '{location}': {first['msg']}") from exc


def read_surface_file(source: str | Path) -> SurfaceFile:
    return parse_surface_file(read_text(source))


def dump_surface_file(spec: SurfaceFile) -> str:
    """Canonical text form; reading it back and dumping again gives the same bytes."""
    return spec.model_dump_json(indent=2) + "\n"


def write_surface_file(spec: SurfaceFile, target: str | Path) -> None:
    write_text(target, dump_surface_file(spec))


def load_surface(source: str | Path, *, eps_geo: float = config.EPS_GEO) -> Surface:
    name = "stdin" if str(source) == STDIO else Path(source).stem
    return validate(read_surface_file(source), eps_geo=eps_geo, name=name)


def surface_to_file(s: Surface) -> SurfaceFile:
    return SurfaceFile.model_validate(
        {
            "polygons": [
                {"id": p.id, "vertices": [(z.real + 0.0, z.imag + 0.0) for z in p.vertices]}
                for p in s.polygons
            ],
            "pairings": [(tuple(pr.e), tuple(pr.f)) for pr in s.pairings],
            "marked_points": [tuple(c) for c in s.marked_points],
        }
    )


def surface_id(s: Surface) -> str:
    return content_id(surface_to_file(s).model_dump(mode="json"), prefix="s-")


def trace_to_lines(result: TraceResult) -> Iterator[str]:
    """JSON lines: one per crossing, closed by an outcome record."""
    for record in result.crossings:
        yield TraceCrossingLine(
            edge=tuple(record.edge),
            coord=record.coord,
            accumulated_ratio=record.accumulated_ratio,
        ).model_dump_json()
    yield TraceOutcomeLine(
        outcome=outcome_to_response(result.outcome),
        crossings=len(result.crossings),
        length=result.length,
    ).model_dump_json()


def read_trace_lines(lines: Iterable[str]) -> tuple[list[TraceCrossingLine], TraceOutcomeLine]:
    crossings: list[TraceCrossingLine] = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
            if payload.get("kind") == "outcome":
                return crossings, TraceOutcomeLine.model_validate(payload)
            crossings.append(TraceCrossingLine.model_validate(payload))
        except (ValueError, ValidationError) as exc:
            raise SurfaceFileException(detail=f"Invalid trace record on line {number}") from exc
    raise SurfaceFileException(detail="Trace dump has no outcome record")
