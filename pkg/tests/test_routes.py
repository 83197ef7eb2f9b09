import math

import pytest
from fastapi.testclient import TestClient

from dilaflow.main import app
from dilaflow.services.builders import dilation_cylinder_file, torus_file, two_chamber_file


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def torus_body():
    return torus_file().model_dump(mode="json")


@pytest.fixture(scope="module")
def cylinder_body():
    return dilation_cylinder_file(0.5, math.pi / 3).model_dump(mode="json")


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy", "api": "ok"}


def test_validate_torus(client, torus_body):
    response = client.post("/surfaces/validate", json=torus_body)
    assert response.status_code == 200
    info = response.json()
    assert info["genus"] == 1
    assert info["index_sum"] == 0
    assert info["gauss_bonnet"] is True


def test_invalid_surface_is_rejected_with_its_class(client):
    bowtie = {"polygons": [{"id": 0, "vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}], "pairings": []}
    response = client.post("/surfaces/validate", json=bowtie)
    assert response.status_code == 422
    assert response.json()["error"] == "SelfIntersectingPolygonException"


def test_schema_violation_is_a_validation_error(client):
    response = client.post("/surfaces/validate", json={"polygons": "square"})
    assert response.status_code == 422
    assert response.json()["detail"] == "Validation error"


def test_example_surfaces(client):
    assert client.get("/surfaces/examples/torus").json()["pairings"] == [[[0, 0], [0, 2]], [[0, 1], [0, 3]]]
    cylinder = client.get("/surfaces/examples/cylinder", params={"rho": 0.25, "alpha": 1.0}).json()
    assert len(cylinder["polygons"]) == 1
    assert client.get("/surfaces/examples/cylinder", params={"rho": 2.0}).status_code == 422
    assert len(client.get("/surfaces/examples/two-chamber").json()["polygons"]) == 2


def test_render(client, torus_body):
    response = client.post("/surfaces/render", json={"surface": torus_body})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")
    assert response.text.startswith("<svg")


def test_trace(client, torus_body):
    body = {
        "surface": torus_body,
        "start": {"polygon": 0, "position": [0.5, 0.25]},
        "direction": 0.0,
        "budget": {"max_crossings": 10},
    }
    trace = client.post("/flow/trace", json=body).json()
    assert len(trace["crossings"]) == 10
    assert trace["outcome"]["kind"] == "budget_exhausted"


def test_trace_from_outside_the_polygon(client, torus_body):
    body = {"surface": torus_body, "start": {"polygon": 0, "position": [3.0, 3.0]}, "direction": 0.5}
    response = client.post("/flow/trace", json=body)
    assert response.status_code == 422
    assert response.json()["error"] == "InvalidStartException"


def test_return_map(client, torus_body):
    body = {"surface": torus_body, "section": [0, 0], "direction": math.pi / 2}
    rmap = client.post("/flow/return-map", json=body).json()
    assert len(rmap["branches"]) == 1
    assert rmap["branches"][0]["slope"] == pytest.approx(1.0)


def test_classify(client, torus_body):
    body = {"surface": torus_body, "direction": math.pi / 4, "budget": {"max_crossings": 200}}
    assert client.post("/flow/classify", json=body).json()["kind"] == "saddle_connection"


def test_geodesics_on_the_cylinder(client, cylinder_body):
    body = {"surface": cylinder_body, "direction": math.pi / 6}
    found = client.post("/periodic/geodesics", json=body).json()
    assert len(found["geodesics"]) == 1
    assert found["geodesics"][0]["holonomy"] == pytest.approx(0.5)


def test_cylinders(client, cylinder_body):
    body = {"surface": cylinder_body, "direction": math.pi / 6}
    (cylinder,) = client.post("/periodic/cylinders", json=body).json()["cylinders"]
    assert cylinder["angular_extent"] == pytest.approx(math.pi / 3, abs=1e-6)


def test_saddle_connections(client, torus_body):
    found = client.post("/periodic/saddle-connections", json={"surface": torus_body, "bound": 1.5}).json()
    assert len(found["saddle_connections"]) == 8
    assert client.post("/periodic/saddle-connections", json={"surface": torus_body, "bound": 0}).status_code == 422


def test_horizon_of_the_slit(client):
    body = two_chamber_file().model_dump(mode="json")
    listed = client.post("/periodic/saddle-connections", json={"surface": body, "bound": 1.5}).json()
    slit = next(sc for sc in listed["saddle_connections"] if sc["signature"] == [] and sc["start_corner"] == [0, 4])
    request = {
        "surface": body,
        "saddle_connection": slit["id"],
        "bound": 1.5,
        "directions": 2,
        "budget": {"max_crossings": 200, "max_path_length": 1000},
    }
    report = client.post("/horizon/", json=request).json()
    assert report["disconnecting"] is True
    assert report["components"] == 2
    assert report["estimate"]["certified_bound"] == 1


def test_unknown_saddle_connection(client, torus_body):
    request = {"surface": torus_body, "saddle_connection": "sc-nope", "bound": 1.5}
    response = client.post("/horizon/", json=request)
    assert response.status_code == 404
    assert response.json()["error"] == "SaddleConnectionNotFoundException"


def test_sweep(client, torus_body):
    body = {"surface": torus_body, "n_directions": 4, "budget": {"max_crossings": 100}}
    report = client.post("/sweep/", json=body).json()
    assert report["morse_smale_fraction"] == 0.0
    assert [r["cls"]["kind"] for r in report["records"]] == ["saddle_connection"] * 4
