import cmath
import math

import numpy as np
import pytest
from shapely.geometry import Polygon as ShapelyPolygon

from dilaflow.models.flow import (
    BudgetExhausted,
    CrossedBoundary,
    CrossingRecord,
    FlowPoint,
    HitSingularity,
    LimitCycle,
    TraceConfig,
)
from dilaflow.models.geometry import Corner, DirectionAngle, EdgeRef
from dilaflow.services.builders import build_dilation_cylinder
from dilaflow.services.horizon_service import random_interior_point
from dilaflow.services.tracer_service import (
    detect_limit_cycle,
    first_return,
    reverse_crossings,
    trace,
    trace_from_edge,
    trace_separatrix,
)
from dilaflow.utils.custom_exceptions import InvalidStartException


def test_horizontal_torus_trace_exhausts_crossing_budget(torus):
    result = trace(torus, FlowPoint(0, complex(0.5, 0.25)), DirectionAngle(0.0), TraceConfig(max_crossings=10))
    assert isinstance(result.outcome, BudgetExhausted)
    assert result.outcome.reason == "crossings"
    assert len(result.crossings) == 10
    for record in result.crossings:
        assert record.edge == EdgeRef(0, 1)
        assert record.coord == pytest.approx(0.25)
        assert record.accumulated_ratio == pytest.approx(1.0)
    assert result.length == pytest.approx(9.5)


def test_path_length_budget(torus):
    cfg = TraceConfig(max_crossings=1000, max_path_length=3.0)
    result = trace(torus, FlowPoint(0, complex(0.5, 0.25)), DirectionAngle(0.0), cfg)
    assert isinstance(result.outcome, BudgetExhausted)
    assert result.outcome.reason == "path_length"
    assert result.length >= 3.0


def test_diagonal_separatrix_hits_the_opposite_corner(torus):
    result = trace_separatrix(torus, Corner(0, 0), DirectionAngle(math.pi / 4), TraceConfig())
    assert isinstance(result.outcome, HitSingularity)
    assert result.outcome.singularity == 0
    assert result.crossings == ()
    assert result.length == pytest.approx(math.sqrt(2))


def test_trace_from_vertex_is_a_separatrix(torus):
    result = trace(torus, FlowPoint(0, 0j), DirectionAngle(math.atan2(1, 2)))
    assert isinstance(result.outcome, HitSingularity)
    # (2, 1) lattice vector: one crossing of the right side.
    assert len(result.crossings) == 1
    assert result.length == pytest.approx(math.sqrt(5))


def test_separatrix_outside_corner_sector_rejected(torus):
    with pytest.raises(InvalidStartException):
        trace_separatrix(torus, Corner(0, 0), DirectionAngle(math.pi), TraceConfig())


def test_start_outside_polygon_rejected(torus):
    with pytest.raises(InvalidStartException):
        trace(torus, FlowPoint(0, complex(2.0, 2.0)), DirectionAngle(0.0))
    with pytest.raises(InvalidStartException):
        trace(torus, FlowPoint(5, complex(0.5, 0.5)), DirectionAngle(0.0))


def test_start_on_edge_enters_the_side_the_direction_points_to(torus):
    up = trace(torus, FlowPoint(0, complex(0.5, 0.0)), DirectionAngle(math.pi / 2), TraceConfig(max_crossings=2))
    assert up.crossings[0].edge == EdgeRef(0, 2)
    down = trace(torus, FlowPoint(0, complex(0.5, 0.0)), DirectionAngle(-math.pi / 2), TraceConfig(max_crossings=2))
    assert down.crossings[0].edge == EdgeRef(0, 0)


def test_cylinder_trace_converges_to_the_radial_geodesic(cylinder):
    start = FlowPoint(0, 0.75 * cmath.exp(1j * math.pi / 6) + 0.05j)
    result = trace(cylinder, start, DirectionAngle(math.pi / 6))
    assert isinstance(result.outcome, LimitCycle)
    g = result.outcome.geodesic
    assert g.holonomy == pytest.approx(0.5, abs=1e-9)
    assert g.signature == (EdgeRef(0, 0),)
    assert g.base.coord == pytest.approx(0.5, abs=1e-9)
    assert g.is_hyperbolic


def test_cylinder_trace_leaves_through_the_boundary(cylinder):
    start = FlowPoint(0, 0.75 * cmath.exp(1j * math.pi / 6))
    result = trace(cylinder, start, DirectionAngle(math.pi / 6 + math.pi / 2))
    assert isinstance(result.outcome, CrossedBoundary)
    assert result.outcome.edge == EdgeRef(0, 1)


def test_accumulated_ratio_tracks_the_chart(cylinder):
    start = FlowPoint(0, 0.75 * cmath.exp(1j * math.pi / 6))
    result = trace(cylinder, start, DirectionAngle(math.pi / 6), TraceConfig(max_crossings=4), detect_cycles=False)
    ratios = [c.accumulated_ratio for c in result.crossings]
    assert ratios == pytest.approx([0.5, 0.25, 0.125, 0.0625])


def test_reversal_reproduces_the_crossings(torus):
    d = DirectionAngle(math.atan2(3, 7))
    forward = trace(torus, FlowPoint(0, complex(0.3, 0.6)), d, TraceConfig(max_crossings=6))
    end = forward.end
    # The run ends on the exit point of its last crossing, still in the old chart.
    backward = trace(torus, end, d.reversed(), TraceConfig(max_crossings=5))
    expected = reverse_crossings(torus, forward.crossings[:-1])
    assert [c.edge for c in backward.crossings] == [c.edge for c in expected]
    for got, want in zip(backward.crossings, expected):
        assert got.coord == pytest.approx(want.coord, abs=1e-9)


def test_first_return_on_torus_section(torus):
    signature, y, ratio = first_return(torus, EdgeRef(0, 0), 0.3, DirectionAngle(math.pi / 2), TraceConfig())
    assert signature == (EdgeRef(0, 2),)
    assert y == pytest.approx(0.3)
    assert ratio == pytest.approx(1.0)


def test_first_return_tags_boundary_exits(cylinder):
    tag = first_return(cylinder, EdgeRef(0, 0), 0.5, DirectionAngle(math.pi / 6 + 1.2), TraceConfig())
    assert tag in ("boundary", "singularity")


def test_detect_limit_cycle_needs_contraction():
    cfg = TraceConfig(cycle_confirmations=3)
    edge = EdgeRef(0, 0)
    flat = [CrossingRecord(edge, 0.5, 1.0) for _ in range(6)]
    assert detect_limit_cycle(flat, cfg) is None
    coords = [0.5 + 0.2 * 0.5**k for k in range(6)]
    contracting = [CrossingRecord(edge, x, 0.5 ** (k + 1)) for k, x in enumerate(coords)]
    g = detect_limit_cycle(contracting, cfg)
    assert g is not None
    assert g.holonomy == pytest.approx(0.5)
    assert g.base.coord == pytest.approx(0.5)


def test_trace_from_edge_parallel_direction_rejected(torus):
    with pytest.raises(InvalidStartException):
        trace_from_edge(torus, EdgeRef(0, 0), 0.5, DirectionAngle(0.0), TraceConfig())


def test_slope_one_half_repeats_every_three_crossings(torus):
    result = trace(torus, FlowPoint(0, 0.5 + 0.5j), DirectionAngle(math.atan2(1, 2)), TraceConfig(max_crossings=9))
    edges = [c.edge for c in result.crossings]
    assert len(edges) == 9
    assert edges[:3] == edges[3:6] == edges[6:]
    assert sorted(edges[:3]).count(EdgeRef(0, 1)) == 2
    assert all(c.accumulated_ratio == pytest.approx(1.0) for c in result.crossings)


def test_reverse_crossings_ratios_are_relative_to_the_final_chart(cylinder):
    records = [CrossingRecord(EdgeRef(0, 0), x, 0.5 ** (k + 1)) for k, x in enumerate((0.2, 0.35, 0.425))]
    back = reverse_crossings(cylinder, records)
    assert [c.edge for c in back] == [EdgeRef(0, 2)] * 3
    assert [c.coord for c in back] == pytest.approx([0.575, 0.65, 0.8])
    assert [c.accumulated_ratio for c in back] == pytest.approx([2.0, 4.0, 8.0])


def test_reversal_on_two_chamber_matches_the_backward_trace(two_chamber):
    d = DirectionAngle(1.1)
    forward = trace(
        two_chamber, FlowPoint(0, complex(1.5, 0.5)), d, TraceConfig(max_crossings=6), detect_cycles=False
    )
    assert len(forward.crossings) == 6
    backward = trace(two_chamber, forward.end, d.reversed(), TraceConfig(max_crossings=5), detect_cycles=False)
    expected = reverse_crossings(two_chamber, forward.crossings[:-1])
    assert [c.edge for c in backward.crossings] == [c.edge for c in expected]
    assert [c.coord for c in backward.crossings] == pytest.approx([c.coord for c in expected], abs=1e-9)
    assert [c.accumulated_ratio for c in backward.crossings] == pytest.approx(
        [c.accumulated_ratio for c in expected]
    )
    assert [c.accumulated_ratio for c in expected] == pytest.approx([1 / 3, 1.0, 0.5, 0.25, 0.5])


def test_trace_along_the_seam_of_a_two_wedge_cylinder_is_trapped():
    s = build_dilation_cylinder(0.5, 3 * math.pi / 4)
    seam = 3 * math.pi / 8
    start = FlowPoint(0, 0.75 * cmath.exp(1j * (seam - 0.05)))
    result = trace(s, start, DirectionAngle(seam))
    assert isinstance(result.outcome, LimitCycle)
    g = result.outcome.geodesic
    assert g.holonomy == pytest.approx(0.5, abs=1e-9)
    assert g.signature == (EdgeRef(0, 0),)
    assert g.base.coord == pytest.approx(1.0)


def test_trace_passes_through_a_flat_vertex():
    s = build_dilation_cylinder(0.5, 3 * math.pi / 4)
    z = 0.7 * cmath.exp(0.2j)
    # Aimed straight at the outer end of the seam.
    d = DirectionAngle(cmath.phase(cmath.exp(3j * math.pi / 8) - z))
    result = trace(s, FlowPoint(0, z), d)
    assert [c.edge for c in result.crossings[:2]] == [EdgeRef(0, 0), EdgeRef(0, 1)]
    assert [c.coord for c in result.crossings[:2]] == [1.0, 1.0]
    assert isinstance(result.outcome, LimitCycle)
    assert result.outcome.geodesic.holonomy == pytest.approx(0.5, abs=1e-9)


def test_separatrix_from_a_flat_vertex_leaves_through_the_matching_corner():
    s = build_dilation_cylinder(0.5, 3 * math.pi / 4)
    result = trace_separatrix(s, Corner(0, 1), DirectionAngle(1.9), TraceConfig())
    assert result.start.polygon == 1
    assert not isinstance(result.outcome, HitSingularity)


def test_random_cylinder_starts_are_trapped_with_half_decay(cylinder):
    alpha = math.pi / 3
    rng = np.random.default_rng(11)
    shape = ShapelyPolygon([(v.real, v.imag) for v in cylinder.polygon(0).vertices])
    for _ in range(100):
        start = FlowPoint(0, random_interior_point(shape, rng))
        beta = float(rng.uniform(0.05, alpha - 0.05))
        result = trace(cylinder, start, DirectionAngle(beta))
        assert isinstance(result.outcome, LimitCycle), (start, beta)
        fixed = result.outcome.geodesic.base.coord
        x1, x2 = result.crossings[-2].coord, result.crossings[-1].coord
        assert (x2 - fixed) / (x1 - fixed) == pytest.approx(0.5, abs=1e-6)
