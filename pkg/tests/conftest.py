import math

import pytest

from dilaflow.services.builders import build_dilation_cylinder, build_torus, build_two_chamber


@pytest.fixture(scope="session")
def torus():
    return build_torus()


@pytest.fixture(scope="session")
def cylinder():
    """Dilation cylinder with ratio 1/2 and opening angle π/3 (one wedge)."""
    return build_dilation_cylinder(0.5, math.pi / 3)


@pytest.fixture(scope="session")
def two_chamber():
    return build_two_chamber()
