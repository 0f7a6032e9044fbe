import math

import pytest

from freelab.errors import DegenerateAngle, InfeasibleExtension, UnwoundSingularity
from freelab.kinematics import (
    FreeGeometry,
    canonical_geometry,
    configuration,
    fiber_length,
    max_extension,
    wrap_angle,
)


def test_fiber_length_formula(geom40):
    assert fiber_length(geom40) == pytest.approx(
        geom40.L / math.cos(geom40.Gamma), rel=1e-15
    )


def test_wrap_angle_formula(geom40):
    assert wrap_angle(geom40) == pytest.approx(
        geom40.L * math.tan(geom40.Gamma) / geom40.R, rel=1e-15
    )


def test_canonical_dimensions(geom40):
    assert geom40.L == pytest.approx(0.175)
    assert geom40.inner_radius == pytest.approx(0.00476)
    assert geom40.R == pytest.approx(0.00556)
    assert geom40.n_fibers == 6


def test_rest_configuration_recovers_initial_geometry(geom40):
    conf = configuration(geom40, 0.0, 0.0)
    assert conf.l == pytest.approx(geom40.L, rel=1e-14)
    assert conf.r == pytest.approx(geom40.R, rel=1e-12)
    assert conf.gamma == pytest.approx(geom40.Gamma, rel=1e-12)
    assert conf.psi == pytest.approx(wrap_angle(geom40), rel=1e-14)


def test_inextensibility_on_grid(geom40):
    """l^2 + (r psi)^2 = b^2 must hold identically."""
    b = fiber_length(geom40)
    theta = wrap_angle(geom40)
    s_max = max_extension(geom40)
    for i in range(20):
        s = -0.02 + (0.999 * s_max + 0.02) * i / 19
        for j in range(20):
            phi = -0.9 * theta + 1.2 * theta * j / 19
            conf = configuration(geom40, s, phi)
            lhs = conf.l**2 + (conf.r * conf.psi) ** 2
            assert abs(lhs - b * b) / (b * b) < 1e-12


def test_gamma_depends_only_on_length(geom40):
    """tan(gamma) = sqrt(b^2 - l^2) / l regardless of phi."""
    b = fiber_length(geom40)
    s = 0.001
    l = geom40.L + s
    expected = math.atan2(math.sqrt(b * b - l * l), l)
    for phi in (-0.5, 0.0, 0.5, 2.0):
        conf = configuration(geom40, s, phi)
        assert conf.gamma == pytest.approx(expected, rel=1e-13)


def test_handedness_enters_wrap_angle():
    right = canonical_geometry(math.radians(40.0), handedness=1)
    left = canonical_geometry(math.radians(40.0), handedness=-1)
    theta = wrap_angle(right)
    phi = 0.3
    assert configuration(right, 0.0, phi).psi == pytest.approx(theta + phi)
    assert configuration(left, 0.0, phi).psi == pytest.approx(theta - phi)


def test_taut_fiber_raises(geom40):
    with pytest.raises(InfeasibleExtension):
        configuration(geom40, max_extension(geom40), 0.0)


def test_collapsed_tube_raises(geom40):
    with pytest.raises(InfeasibleExtension):
        configuration(geom40, -geom40.L, 0.0)


def test_full_unwind_raises(geom40):
    theta = wrap_angle(geom40)
    with pytest.raises(UnwoundSingularity):
        configuration(geom40, 0.0, -theta)


def test_max_extension(geom40):
    assert max_extension(geom40) == pytest.approx(
        geom40.L / math.cos(geom40.Gamma) - geom40.L
    )


def test_geometry_validation():
    with pytest.raises(DegenerateAngle):
        canonical_geometry(0.0)
    with pytest.raises(DegenerateAngle):
        canonical_geometry(math.pi / 2)
    with pytest.raises(ValueError):
        FreeGeometry(L=-1.0, inner_radius=0.005, wall=0.001, Gamma=0.5)
    with pytest.raises(ValueError):
        FreeGeometry(L=0.1, inner_radius=0.005, wall=0.001, Gamma=0.5,
                     handedness=2)
