import json
import math

import pytest
from typer.testing import CliRunner

from dilaflow.cli import app
from dilaflow.schemas import SCHEMAS, SweepReportResponse

runner = CliRunner()


def _surface(*make_args: str) -> str:
    result = runner.invoke(app, ["make", *make_args])
    assert result.exit_code == 0, result.output
    return result.stdout


@pytest.fixture(scope="module")
def torus_text():
    return _surface("torus")


@pytest.fixture(scope="module")
def cylinder_text():
    return _surface("cylinder", "--rho", "0.5", "--alpha", "1.0471975")


def test_make_torus_then_info(torus_text):
    result = runner.invoke(app, ["info", "-"], input=torus_text)
    assert result.exit_code == 0
    assert "genus       1" in result.stdout
    assert "index sum   0" in result.stdout
    assert "marked      1" in result.stdout


def test_info_json(torus_text):
    result = runner.invoke(app, ["info", "-", "--json"], input=torus_text)
    report = json.loads(result.stdout)
    assert report["genus"] == 1
    assert report["index_sum"] == 0


def test_validate(torus_text):
    result = runner.invoke(app, ["validate", "-"], input=torus_text)
    assert result.exit_code == 0
    assert result.stdout.startswith("ok: stdin (s-")


def test_make_writes_to_a_file(tmp_path):
    target = tmp_path / "chambers.json"
    assert runner.invoke(app, ["make", "two-chamber", "-o", str(target)]).exit_code == 0
    result = runner.invoke(app, ["info", str(target), "--json"])
    assert json.loads(result.stdout)["genus"] == 2


def test_geodesics_on_the_cylinder(cylinder_text):
    result = runner.invoke(app, ["geodesics", "-", "--dir", "0.5235987", "--json"], input=cylinder_text)
    assert result.exit_code == 0
    found = json.loads(result.stdout)["geodesics"]
    assert len(found) == 1
    assert found[0]["holonomy"] == pytest.approx(0.5)


def test_trace_writes_json_lines(torus_text):
    args = ["trace", "-", "--start", "0,0.5,0.25", "--dir", "0", "--budget", "3"]
    result = runner.invoke(app, args, input=torus_text)
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert len(lines) == 4
    assert json.loads(lines[-1])["outcome"]["kind"] == "budget_exhausted"


def test_domain_error_exits_with_one(torus_text):
    args = ["trace", "-", "--start", "0,3,3", "--dir", "0.5"]
    result = runner.invoke(app, args, input=torus_text)
    assert result.exit_code == 1
    assert "error: " in result.output


def test_invalid_file_exits_with_one():
    result = runner.invoke(app, ["validate", "-"], input="{}")
    assert result.exit_code == 1


def test_usage_errors_exit_with_two(torus_text):
    assert runner.invoke(app, ["trace", "-", "--start", "0,1", "--dir", "0"], input=torus_text).exit_code == 2
    assert runner.invoke(app, ["cylinders", "-"], input=torus_text).exit_code == 2
    assert runner.invoke(app, ["sweep", "-", "--n", "0"], input=torus_text).exit_code == 2
    assert runner.invoke(app, ["make", "cylinder", "--bogus"]).exit_code == 2


def test_out_of_range_builder_parameter():
    result = runner.invoke(app, ["make", "cylinder", "--rho", "1.5"])
    assert result.exit_code == 1


def test_veech_on_a_narrow_cylinder(cylinder_text):
    result = runner.invoke(app, ["cylinders", "-", "--veech", "--json"], input=cylinder_text)
    assert result.exit_code == 0
    assert json.loads(result.stdout)["verdict"] == "no_large_cylinder_found"


def test_saddles(torus_text):
    result = runner.invoke(app, ["saddles", "-", "--bound", "1.5"], input=torus_text)
    assert result.exit_code == 0
    assert len(result.stdout.splitlines()) == 8


def test_sweep_json_is_reproducible(torus_text, tmp_path):
    outputs = []
    for run in range(2):
        target = tmp_path / f"sweep{run}.json"
        svg = tmp_path / f"sweep{run}.svg"
        args = ["sweep", "-", "--n", "8", "--budget", "100", "--seed", "3", "-o", str(target), "--svg", str(svg)]
        assert runner.invoke(app, args, input=torus_text).exit_code == 0
        outputs.append((target.read_bytes(), svg.read_bytes()))
    assert outputs[0] == outputs[1]
    report = SweepReportResponse.model_validate_json(outputs[0][0])
    assert report.budget["seed"] == 3


def test_render_is_reproducible(cylinder_text, tmp_path):
    outputs = []
    for run in range(2):
        target = tmp_path / f"net{run}.svg"
        args = ["render", "-", "-o", str(target), "--dir", str(math.pi / 6), "--geodesics", "--trace", "0,0.6,0.45"]
        result = runner.invoke(app, args, input=cylinder_text)
        assert result.exit_code == 0, result.output
        outputs.append(target.read_text())
    assert outputs[0] == outputs[1]
    assert outputs[0].startswith("<svg")


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_schema(name):
    result = runner.invoke(app, ["schema", name])
    assert result.exit_code == 0
    assert "properties" in json.loads(result.stdout) or "$defs" in json.loads(result.stdout)


def test_unknown_schema():
    assert runner.invoke(app, ["schema", "nope"]).exit_code == 2
