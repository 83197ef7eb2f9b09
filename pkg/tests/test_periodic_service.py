import math

import numpy as np
import pytest

from dilaflow.models.flow import TraceConfig
from dilaflow.models.geometry import DirectionAngle
from dilaflow.models.periodic import ClosedGeodesic, FoundCylinder, NoLargeCylinderFound
from dilaflow.services.builders import build_dilation_cylinder
from dilaflow.services.periodic_service import (
    closed_geodesics_in_direction,
    cylinders_in_direction,
    extend_to_cylinder,
    flat_families_in_direction,
    veech_criterion,
)
from dilaflow.utils.custom_exceptions import NotHyperbolicException

ALPHA = math.pi / 3


def test_cylinder_has_one_geodesic_per_interior_direction(cylinder):
    for beta in (0.1, ALPHA / 2, ALPHA - 0.1):
        (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(beta))
        assert g.holonomy == pytest.approx(0.5, abs=1e-9)
        assert g.direction.theta == pytest.approx(beta)
        assert g.is_hyperbolic


def test_reversed_direction_reports_the_contracting_orientation(cylinder):
    (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(ALPHA / 2 + math.pi))
    assert g.holonomy == pytest.approx(0.5, abs=1e-9)
    assert g.direction.theta == pytest.approx(ALPHA / 2)


def test_cylinder_has_no_geodesic_outside_its_opening(cylinder):
    assert closed_geodesics_in_direction(cylinder, DirectionAngle(ALPHA + 0.4)) == []


def test_torus_directions_have_flat_families_only(torus):
    d = DirectionAngle(math.pi / 2)
    assert closed_geodesics_in_direction(torus, d) == []
    families = flat_families_in_direction(torus, d)
    assert families
    assert all(f.direction == d for f in families)


def test_extend_to_cylinder_recovers_the_opening_angle(cylinder):
    (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(ALPHA / 2))
    c = extend_to_cylinder(cylinder, g)
    assert c.angular_extent == pytest.approx(ALPHA, abs=1e-6)
    lo, hi = c.direction_interval
    assert lo == pytest.approx(0.0, abs=1e-6)
    assert hi == pytest.approx(ALPHA, abs=1e-6)
    assert c.contains_direction(ALPHA / 2)


def test_extend_to_cylinder_boundary_is_parallel_to_the_interval_ends(cylinder):
    (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(0.4))
    c = extend_to_cylinder(cylinder, g)
    for sc in c.boundary:
        theta = sc.direction.theta
        assert min(abs(math.remainder(theta - end, math.pi)) for end in c.direction_interval) < 1e-6


def test_flat_geodesic_cannot_be_extended(cylinder):
    (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(0.5))
    flat = ClosedGeodesic(g.signature, g.direction, 1.0, g.base, is_hyperbolic=False)
    with pytest.raises(NotHyperbolicException):
        extend_to_cylinder(cylinder, flat)


def test_cylinders_in_direction(cylinder):
    (c,) = cylinders_in_direction(cylinder, DirectionAngle(0.5), with_boundary=False)
    assert c.angular_extent == pytest.approx(ALPHA, abs=1e-6)


def test_veech_negative_on_narrow_cylinder(cylinder):
    verdict = veech_criterion(cylinder, grid=8)
    assert isinstance(verdict, NoLargeCylinderFound)
    assert verdict.budget == 8
    assert verdict.largest_extent == pytest.approx(ALPHA, abs=1e-6)


def test_veech_positive_on_wide_cylinder():
    s = build_dilation_cylinder(0.5, math.pi + 0.1)
    verdict = veech_criterion(s, grid=8)
    assert isinstance(verdict, FoundCylinder)
    assert verdict.cylinder.angular_extent >= math.pi


@pytest.mark.slow
def test_cylinder_oracle_over_many_directions(cylinder):
    for beta in np.linspace(0.01, ALPHA - 0.01, 100):
        found = closed_geodesics_in_direction(cylinder, DirectionAngle(float(beta)), TraceConfig())
        assert len(found) == 1
        assert abs(found[0].holonomy - 0.5) < 1e-9
    (g,) = closed_geodesics_in_direction(cylinder, DirectionAngle(ALPHA / 2))
    assert abs(extend_to_cylinder(cylinder, g, with_boundary=False).angular_extent - ALPHA) < 1e-6


def test_seam_direction_of_a_two_wedge_cylinder_has_one_geodesic():
    s = build_dilation_cylinder(0.5, 3 * math.pi / 4)
    (g,) = closed_geodesics_in_direction(s, DirectionAngle(3 * math.pi / 8))
    assert g.holonomy == pytest.approx(0.5, abs=1e-9)
    assert g.direction.theta == pytest.approx(3 * math.pi / 8)


def test_veech_negative_on_two_wedge_cylinder():
    alpha = 3 * math.pi / 4
    verdict = veech_criterion(build_dilation_cylinder(0.5, alpha), grid=8)
    assert isinstance(verdict, NoLargeCylinderFound)
    assert verdict.largest_extent == pytest.approx(alpha, abs=1e-6)
