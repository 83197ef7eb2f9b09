import math

import numpy as np
import pytest
from shapely.geometry import Polygon as ShapelyPolygon

from dilaflow.models.flow import FlowPoint, LimitCycle, TraceConfig
from dilaflow.models.geometry import DirectionAngle
from dilaflow.models.sweep import (
    DirectionRecord,
    GeodesicSighting,
    MorseSmale,
    SaddleConnectionDirection,
    Unresolved,
)
from dilaflow.services.builders import build_dilation_cylinder
from dilaflow.services.horizon_service import random_interior_point
from dilaflow.services.sweep_service import (
    classify_direction,
    density_stats,
    hyperbolic_intervals,
    inspect_direction,
    sweep,
)
from dilaflow.services.tracer_service import trace
from dilaflow.utils.custom_exceptions import ParamOutOfRangeException

FAST = TraceConfig(max_crossings=500, max_path_length=1e4, probe_count=4)


def test_rational_torus_direction_is_a_saddle_connection_direction(torus):
    assert isinstance(classify_direction(torus, DirectionAngle(math.pi / 4), FAST), SaddleConnectionDirection)


def test_irrational_torus_direction_stays_unresolved(torus):
    cls = classify_direction(torus, DirectionAngle(1.0), TraceConfig(max_crossings=200))
    assert isinstance(cls, Unresolved)
    assert cls.max_crossings == 200


def test_cylinder_direction_inside_the_sector_is_morse_smale(cylinder):
    record = inspect_direction(cylinder, math.pi / 6, FAST)
    assert isinstance(record.cls, MorseSmale)
    assert record.cls.geodesic_ids
    assert record.has_hyperbolic
    assert all(g.holonomy == pytest.approx(0.5) for g in record.geodesics)


def test_cylinder_direction_outside_the_sector_leaves_through_the_boundary(cylinder):
    record = inspect_direction(cylinder, 2.5, FAST)
    assert isinstance(record.cls, MorseSmale)
    assert record.cls.geodesic_ids == ()
    assert not record.has_hyperbolic


def test_opposite_directions_agree(cylinder):
    forward = classify_direction(cylinder, DirectionAngle(math.pi / 6), FAST)
    backward = classify_direction(cylinder, DirectionAngle(math.pi / 6 + math.pi), FAST)
    assert forward.kind == backward.kind


def test_torus_grid_of_rational_slopes(torus):
    report = sweep(torus, 8, FAST, refine=False)
    assert len(report.records) == 8
    assert all(isinstance(r.cls, SaddleConnectionDirection) for r in report.records)
    assert report.morse_smale_fraction == 0.0
    assert report.hyperbolic_direction_intervals == ()


def test_sweep_is_deterministic(cylinder):
    first = sweep(cylinder, 12, FAST)
    second = sweep(cylinder, 12, FAST)
    assert first == second
    assert first.budget["n_directions"] == 12
    assert list(first.grid) == sorted(first.grid)


def test_sweep_refines_between_classes(cylinder):
    report = sweep(cylinder, 12, FAST)
    assert len(report.records) >= 12
    coarse = sweep(cylinder, 12, FAST, refine=False)
    assert len(coarse.records) == 12


def test_sweep_rejects_an_empty_grid(torus):
    with pytest.raises(ParamOutOfRangeException):
        sweep(torus, 0)


def _record(theta, geodesics=(), cls=None):
    return DirectionRecord(theta=theta, cls=cls or MorseSmale(tuple(g.id for g in geodesics)), geodesics=geodesics)


def test_density_stats_bins_by_angle():
    g = GeodesicSighting("g-1", 0.1, 0.5)
    records = [
        _record(0.1, (g,)),
        _record(0.2),
        _record(math.pi, cls=SaddleConnectionDirection("sc-1")),
        _record(2 * math.pi - 1e-9, cls=Unresolved(10)),
    ]
    stats = density_stats(records, bins=4)
    assert stats.morse_smale == (2, 0, 0, 0)
    assert stats.saddle_connection == (0, 0, 1, 0)
    assert stats.unresolved == (0, 0, 0, 1)
    assert stats.hyperbolic == (1, 0, 0, 0)
    assert stats.nonempty_hyperbolic_bins == 1


def test_hyperbolic_intervals_follow_shared_holonomy():
    a = GeodesicSighting("g-a", 0.1, 0.5)
    b = GeodesicSighting("g-b", 0.2, 0.5)
    c = GeodesicSighting("g-c", 0.4, 0.25)
    records = [_record(0.1, (a,)), _record(0.2, (b,)), _record(0.3), _record(0.4, (c,))]
    assert hyperbolic_intervals(records) == [(0.1, 0.2), (0.4, 0.4)]


@pytest.mark.slow
def test_cylinder_hyperbolic_directions_fill_the_sector(cylinder):
    alpha = math.pi / 3
    report = sweep(cylinder, 200, TraceConfig(max_crossings=2000), refine=False)
    for record in report.records:
        inside = 0.01 < record.theta < alpha - 0.01 or math.pi + 0.01 < record.theta < math.pi + alpha - 0.01
        outside = alpha + 0.01 < record.theta < math.pi - 0.01 or record.theta > math.pi + alpha + 0.01
        if inside:
            assert record.has_hyperbolic, record.theta
        elif outside:
            assert not record.has_hyperbolic, record.theta


@pytest.mark.slow
def test_torus_sweep_has_no_morse_smale_direction(torus):
    report = sweep(torus, 1000, TraceConfig(max_crossings=2000))
    assert report.morse_smale_fraction == 0.0
    assert report.density_stats.nonempty_hyperbolic_bins == 0
    # Slopes 0, 1, ∞ and -1 fall on the grid every 125 steps.
    for k in range(0, 1000, 125):
        theta = 2 * math.pi * k / 1000
        record = min(report.records, key=lambda r: abs(math.remainder(r.theta - theta, 2 * math.pi)))
        assert isinstance(record.cls, SaddleConnectionDirection), theta


@pytest.mark.slow
def test_two_chamber_hyperbolic_directions_are_dense(two_chamber):
    budget = TraceConfig(max_crossings=10_000)
    report = sweep(two_chamber, 1000, budget)
    assert report.density_stats.nonempty_hyperbolic_bins == 100
    doubled = sweep(two_chamber, 1000, TraceConfig(max_crossings=20_000))
    assert doubled.morse_smale_fraction >= report.morse_smale_fraction


def test_seam_direction_of_a_two_wedge_cylinder_is_morse_smale():
    s = build_dilation_cylinder(0.5, 3 * math.pi / 4)
    record = inspect_direction(s, 3 * math.pi / 8, FAST)
    assert isinstance(record.cls, MorseSmale)
    assert [g.holonomy for g in record.geodesics] == pytest.approx([0.5])


def _unresolved(report):
    return {r.theta for r in report.records if isinstance(r.cls, Unresolved)}


def test_doubling_the_budget_only_resolves_directions(two_chamber):
    low = sweep(two_chamber, 24, TraceConfig(max_crossings=300, probe_count=4), refine=False)
    high = sweep(two_chamber, 24, TraceConfig(max_crossings=600, probe_count=4), refine=False)
    assert _unresolved(high) <= _unresolved(low)


def test_morse_smale_verdicts_survive_small_rotations(cylinder):
    report = sweep(cylinder, 12, FAST, refine=False)
    stable = [r.theta for r in report.records if isinstance(r.cls, MorseSmale)]
    assert stable
    for theta in stable:
        for shifted in (theta - 1e-5, theta + 1e-5):
            assert isinstance(classify_direction(cylinder, DirectionAngle(shifted), FAST), MorseSmale), shifted


def test_morse_smale_geodesics_attract_random_trajectories(cylinder):
    report = sweep(cylinder, 12, FAST, refine=False)
    rng = np.random.default_rng(5)
    shape = ShapelyPolygon([(v.real, v.imag) for v in cylinder.polygon(0).vertices])
    seen = 0
    for record in report.records:
        if not isinstance(record.cls, MorseSmale) or not record.cls.geodesic_ids:
            continue
        d = DirectionAngle(record.theta)
        reached = set()
        for _ in range(8):
            start = FlowPoint(0, random_interior_point(shape, rng))
            for phi in (d, d.reversed()):
                outcome = trace(cylinder, start, phi, FAST).outcome
                if isinstance(outcome, LimitCycle):
                    reached.add(outcome.geodesic.id)
        assert set(record.cls.geodesic_ids) <= reached, record.theta
        seen += 1
    assert seen
