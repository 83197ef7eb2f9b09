import json

import pytest

from dilaflow.models.flow import FlowPoint, TraceConfig
from dilaflow.models.geometry import DirectionAngle
from dilaflow.services.builders import dilation_cylinder_file, torus_file, two_chamber_file
from dilaflow.services.io_service import (
    dump_surface_file,
    load_surface,
    parse_surface_file,
    read_surface_file,
    read_trace_lines,
    surface_id,
    surface_to_file,
    trace_to_lines,
    write_surface_file,
)
from dilaflow.services.surface_service import validate
from dilaflow.services.tracer_service import trace
from dilaflow.utils.custom_exceptions import SurfaceFileException


@pytest.mark.parametrize("spec", [torus_file(), dilation_cylinder_file(0.5, 2.0), two_chamber_file()])
def test_dump_is_canonical(spec, tmp_path):
    target = tmp_path / "surface.json"
    write_surface_file(spec, target)
    first = target.read_text(encoding="utf-8")
    assert dump_surface_file(read_surface_file(target)) == first


def test_load_surface_names_it_after_the_file(tmp_path):
    target = tmp_path / "square.json"
    write_surface_file(torus_file(), target)
    s = load_surface(target)
    assert s.name == "square"
    assert s.genus == 1


def test_invalid_json_is_a_file_error():
    with pytest.raises(SurfaceFileException):
        parse_surface_file("{not json")


def test_schema_violations_name_the_location():
    text = json.dumps({"polygons": [{"id": 0, "vertices": [[0, 0], [1, 0]]}]})
    with pytest.raises(SurfaceFileException) as info:
        parse_surface_file(text)
    assert "polygons.0.vertices" in info.value.detail


def test_unknown_fields_rejected():
    text = json.dumps({"polygons": [], "colour": "red"})
    with pytest.raises(SurfaceFileException):
        parse_surface_file(text)


def test_missing_file(tmp_path):
    with pytest.raises(SurfaceFileException):
        read_surface_file(tmp_path / "nowhere.json")


def test_surface_id_is_stable(torus):
    again = validate(surface_to_file(torus))
    assert surface_id(again) == surface_id(torus)
    assert surface_id(torus).startswith("s-")


def test_surface_id_tells_surfaces_apart(torus, cylinder):
    assert surface_id(torus) != surface_id(cylinder)


def test_trace_dump(torus):
    result = trace(torus, FlowPoint(0, 0.5 + 0.25j), DirectionAngle(0.0), TraceConfig(max_crossings=3))
    lines = list(trace_to_lines(result))
    assert len(lines) == 4
    crossings, outcome = read_trace_lines(lines)
    assert [tuple(c.edge) for c in crossings] == [tuple(r.edge) for r in result.crossings]
    assert outcome.crossings == 3
    assert outcome.outcome.kind == "budget_exhausted"
    assert outcome.length == pytest.approx(result.length)


def test_trace_dump_without_outcome_rejected(torus):
    result = trace(torus, FlowPoint(0, 0.5 + 0.25j), DirectionAngle(0.0), TraceConfig(max_crossings=2))
    lines = list(trace_to_lines(result))[:-1]
    with pytest.raises(SurfaceFileException):
        read_trace_lines(lines)


def test_garbage_trace_line_rejected():
    with pytest.raises(SurfaceFileException, match="line 1"):
        read_trace_lines(["{]"])
