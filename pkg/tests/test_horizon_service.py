import math

import numpy as np
import pytest
from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon

from dilaflow.models.flow import TraceConfig
from dilaflow.models.geometry import Corner, DirectionAngle, EdgeRef
from dilaflow.services.builders import two_chamber_slit
from dilaflow.services.horizon_service import (
    cut_along,
    empirical_crossing_bound,
    horizon_report,
    is_disconnecting,
    max_crossing_pencil,
    random_interior_point,
)
from dilaflow.services.saddle_service import connection_along_edge, connection_from_trace
from dilaflow.services.tracer_service import trace_separatrix
from dilaflow.utils.custom_exceptions import NoCrossingFoundException, ParamOutOfRangeException

SMALL = TraceConfig(max_crossings=300, max_path_length=1e4)


@pytest.fixture(scope="module")
def slit(two_chamber):
    return connection_along_edge(two_chamber, two_chamber_slit())


def test_cutting_the_torus_along_an_edge_gives_an_annulus(torus):
    cut = cut_along(torus, connection_along_edge(torus, EdgeRef(0, 0)))
    assert cut.components == 1
    assert cut.genus == 0
    assert len(cut.boundary_components) == 2


def test_cutting_the_torus_along_the_diagonal_gives_an_annulus(torus):
    result = trace_separatrix(torus, Corner(0, 0), DirectionAngle(math.pi / 4), TraceConfig())
    diagonal = connection_from_trace(torus, Corner(0, 0), result)
    cut = cut_along(torus, diagonal)
    assert len(cut.polygons) == 2
    assert cut.components == 1
    assert len(cut.boundary_components) == 2
    assert is_disconnecting(torus, diagonal) == (False, 1)


def test_slit_disconnects_the_two_chambers(two_chamber, slit):
    assert is_disconnecting(two_chamber, slit) == (True, 2)


def test_chamber_edge_does_not_disconnect(two_chamber):
    disconnecting, components = is_disconnecting(two_chamber, connection_along_edge(two_chamber, EdgeRef(0, 0)))
    assert not disconnecting
    assert components == 1


def test_disconnecting_connection_is_crossed_at_most_once(two_chamber, slit):
    estimate = empirical_crossing_bound(two_chamber, slit, [0.3, 1.1, 2.0, 4.0], SMALL)
    assert estimate.certified_bound == 1
    assert estimate.global_max <= 1
    assert set(estimate.per_direction) == {0.3, 1.1, 2.0, 4.0}
    assert estimate.sample_budget.max_crossings == 300
    assert estimate.saddle_connection == slit.id


def test_torus_edge_is_crossed_over_and_over(torus):
    sc = connection_along_edge(torus, EdgeRef(0, 0))
    estimate = empirical_crossing_bound(torus, sc, [1.3], TraceConfig(max_crossings=50))
    assert estimate.global_max > 1
    assert estimate.certified_bound is None
    assert estimate.openness
    assert estimate.openness[0].r == estimate.global_max


def test_sampling_is_seeded(torus):
    sc = connection_along_edge(torus, EdgeRef(0, 0))
    cfg = TraceConfig(max_crossings=40, seed=7)
    first = empirical_crossing_bound(torus, sc, [0.4, 1.3], cfg, certify=False)
    second = empirical_crossing_bound(torus, sc, [0.4, 1.3], cfg, certify=False)
    assert first.per_direction == second.per_direction


def test_pencil_on_the_slit(two_chamber, slit):
    pencil = max_crossing_pencil(two_chamber, slit, (0.3, 0.6), SMALL, directions=4)
    assert pencil.k <= 1
    lo, hi = pencil.interval
    assert 0.3 <= lo < hi <= 0.6


def test_pencil_needs_a_proper_interval(two_chamber, slit):
    with pytest.raises(ParamOutOfRangeException):
        max_crossing_pencil(two_chamber, slit, (0.6, 0.6), SMALL)


def test_random_interior_point_lies_inside():
    shape = ShapelyPolygon([(0, 0), (2, 0), (0, 1)])
    rng = np.random.default_rng(3)
    for _ in range(20):
        z = random_interior_point(shape, rng)
        assert shape.contains(Point(z.real, z.imag))


def test_horizon_report(two_chamber, slit):
    report = horizon_report(two_chamber, slit, SMALL, directions=3)
    assert report.disconnecting
    assert report.components == 2
    assert report.estimate.certified_bound == 1
    assert len(report.estimate.per_direction) == 3
    assert report.pencil is None


def test_horizon_report_rejects_an_empty_grid(two_chamber, slit):
    with pytest.raises(ParamOutOfRangeException):
        horizon_report(two_chamber, slit, SMALL, directions=0)


def test_pencil_witnesses_never_cross_the_connection_forward(two_chamber, slit):
    pencil = max_crossing_pencil(two_chamber, slit, (2.0, 2.6), SMALL, directions=8)
    slit_edges = {two_chamber_slit(), two_chamber.partner(two_chamber_slit())}
    if pencil.k == 0:
        assert pencil.witness_traces == ()
        assert pencil.note
        return
    if pencil.note is None:
        assert pencil.witness_traces
    for witness in pencil.witness_traces:
        assert not any(c.edge in slit_edges for c in witness.crossings)


def test_boundary_connection_of_the_cylinder_gives_the_trivial_pencil(cylinder):
    sc = connection_along_edge(cylinder, EdgeRef(0, 3))
    pencil = max_crossing_pencil(cylinder, sc, (0.2, 0.8), SMALL, directions=4)
    assert pencil.k == 0
    assert pencil.witness_traces == ()
    assert pencil.note
    lo, hi = pencil.interval
    assert (lo, hi) == (0.2, 0.8)
    with pytest.raises(NoCrossingFoundException):
        max_crossing_pencil(cylinder, sc, (0.2, 0.8), SMALL, directions=4, allow_trivial=False)


@pytest.mark.slow
def test_slit_bound_holds_over_ten_thousand_traces(two_chamber, slit):
    budget = TraceConfig(max_crossings=10_000)
    grid = [2 * math.pi * (j + 0.5) / 50 for j in range(50)]
    estimate = empirical_crossing_bound(two_chamber, slit, grid, budget, starts_per_polygon=100)
    assert estimate.sample_budget.traces >= 10_000
    assert estimate.sample_budget.max_crossings == 10_000
    assert estimate.global_max == 1
    assert estimate.certified_bound == 1
    assert estimate.openness
    assert estimate.openness_passed
