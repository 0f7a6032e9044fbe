import math

import pytest

from freelab.dynamics import default_lumped_params
from freelab.kinematics import canonical_geometry


@pytest.fixture(scope="session")
def geom40():
    return canonical_geometry(math.radians(40.0))


@pytest.fixture(scope="session")
def params40(geom40):
    return default_lumped_params(geom40)
