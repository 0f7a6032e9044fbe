import math
import random

import numpy as np
import pytest

from freelab.control import (
    PidGains,
    ReferenceSignal,
    TrajectorySpec,
    auto_tune,
    characteristic_roots,
    closed_loop_coefficients,
    closed_loop_sim,
    cubic_trajectory,
    pid_pressure,
    pid_pressure_unclamped,
    rmsd,
    root_locus,
    stability_boundary,
    _spectral_radius_pid,
    _torsional_zoh,
)
from freelab.errors import DegenerateLeadingCoefficient, TimeOutOfRange
from freelab.units import deg_to_rad, psi_to_pa

from oracles import routh_stable_cubic


def test_coefficients_formula(geom40, params40):
    gains = PidGains(K_p=-100.0, K_i=-50.0, K_d=-2.0)  # equation frame
    c = closed_loop_coefficients(gains, geom40, params40)
    coef = -2.0 * math.pi * geom40.R**3 / math.tan(geom40.Gamma)
    assert c.B == pytest.approx(params40.I_l)
    assert c.C == pytest.approx(coef * gains.K_d + params40.c_t)
    assert c.D == pytest.approx(coef * gains.K_p)
    assert c.E == pytest.approx(c.D + params40.k_t)
    assert c.F == pytest.approx(coef * gains.K_i)


def test_characteristic_roots_against_companion_matrix(geom40, params40):
    gains = PidGains(K_p=-5000.0, K_i=-2e5, K_d=-100.0)
    coeffs = closed_loop_coefficients(gains, geom40, params40)
    roots, _ = characteristic_roots(coeffs)
    # oracle: eigenvalues of the hand-built companion matrix
    b, c, e, f = coeffs.B, coeffs.C, coeffs.E, coeffs.F
    companion = np.array(
        [[-c / b, -e / b, -f / b], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    )
    expected = np.sort_complex(np.linalg.eigvals(companion))
    assert np.allclose(np.sort_complex(roots), expected, rtol=1e-8, atol=1e-6)


def test_roots_satisfy_polynomial(geom40, params40):
    gains = PidGains(K_p=-3000.0, K_i=-1e5, K_d=-50.0)
    coeffs = closed_loop_coefficients(gains, geom40, params40)
    roots, _ = characteristic_roots(coeffs)
    scale = max(abs(coeffs.B), abs(coeffs.C), abs(coeffs.E), abs(coeffs.F))
    for x in roots:
        val = coeffs.B * x**3 + coeffs.C * x**2 + coeffs.E * x + coeffs.F
        assert abs(val) / scale < 1e-6


def test_stability_verdict_matches_routh_hurwitz():
    """Randomized consistency with the Routh-Hurwitz cubic conditions."""
    from freelab.control import ClosedLoopCoefficients

    rng = random.Random(1234)
    checked_stable = checked_unstable = 0
    for _ in range(300):
        b = rng.uniform(0.1, 10.0)
        c = rng.uniform(-5.0, 10.0)
        e = rng.uniform(-5.0, 10.0)
        f = rng.uniform(-5.0, 10.0)
        coeffs = ClosedLoopCoefficients(B=b, C=c, D=0.0, E=e, F=f)
        roots, stable = characteristic_roots(coeffs)
        if abs(roots.real.max()) < 1e-7:
            continue  # too close to the boundary to compare verdicts
        assert stable == routh_stable_cubic(b, c, e, f)
        checked_stable += stable
        checked_unstable += not stable
    assert checked_stable > 20 and checked_unstable > 20


def test_degenerate_leading_coefficient():
    from freelab.control import ClosedLoopCoefficients

    with pytest.raises(DegenerateLeadingCoefficient):
        characteristic_roots(
            ClosedLoopCoefficients(B=0.0, C=1.0, D=0.0, E=1.0, F=1.0)
        )


def test_root_locus_rows(geom40, params40):
    base = PidGains(K_p=-1000.0, K_i=0.0, K_d=0.0)
    rows = root_locus(base, geom40, params40, "K_i",
                      [0.0, -1e4, -1e5, -1e6])
    assert len(rows) == 4
    for row in rows:
        assert row.max_real == pytest.approx(float(row.roots.real.max()))


def test_integral_stability_boundary_analytic(geom40, params40):
    """The continuous loop destabilizes at K_i where C E = B F (Routh)."""
    coef = -2.0 * math.pi * geom40.R**3 / math.tan(geom40.Gamma)
    kp_eq = -2000.0  # equation-frame proportional gain
    base = PidGains(K_p=kp_eq, K_i=0.0, K_d=0.0)
    c = params40.c_t
    e = coef * kp_eq + params40.k_t
    ki_star_eq = c * e / (params40.I_l * coef)  # F = C E / B
    grid = [ki_star_eq * i / 20 for i in range(1, 21)]
    found = stability_boundary(base, geom40, params40, "K_i", grid + [1.1 * ki_star_eq])
    assert found == pytest.approx(ki_star_eq, rel=1e-6)


def test_cubic_trajectory_invariants():
    spec = TrajectorySpec(phi_0=0.1, phi_f=0.7, t_f=2.0)
    traj = cubic_trajectory(spec)
    assert traj(0.0) == pytest.approx((0.1, 0.0))
    assert traj(2.0)[0] == pytest.approx(0.7)
    assert traj(2.0)[1] == pytest.approx(0.0, abs=1e-12)
    phi_mid, rate_mid = traj(1.0)
    assert phi_mid == pytest.approx(0.4)  # midpoint by cubic symmetry
    assert rate_mid == pytest.approx(1.5 * 0.6 / 2.0)  # peak rate 1.5 D / t_f
    with pytest.raises(TimeOutOfRange):
        traj(-0.1)
    with pytest.raises(TimeOutOfRange):
        traj(2.1)


def test_reference_signal_step():
    ref = ReferenceSignal(kind="step", segments=((1.0, 0.5), (1.0, 0.2)))
    assert ref.duration() == pytest.approx(2.0)
    assert ref.sample(0.5) == (0.5, 0.0)
    assert ref.sample(1.5) == (0.2, 0.0)
    assert ref.sample(99.0) == (0.2, 0.0)


def test_reference_signal_trajectory_is_continuous():
    ref = ReferenceSignal(kind="trajectory", segments=((1.0, 0.5), (1.0, 0.2)))
    assert ref.sample(0.0)[0] == pytest.approx(0.0)
    assert ref.sample(1.0 - 1e-9)[0] == pytest.approx(0.5, abs=1e-6)
    assert ref.sample(1.0)[0] == pytest.approx(0.5, abs=1e-9)
    assert ref.sample(2.0)[0] == pytest.approx(0.2)
    # velocities vanish at the joints
    assert ref.sample(1.0)[1] == pytest.approx(0.0, abs=1e-9)


def test_pid_pressure_clamps():
    gains = PidGains(K_p=100.0)
    assert pid_pressure(1.0, 0.0, 0.0, 0.0, gains, (0.0, 50.0)) == 50.0
    assert pid_pressure(-1.0, 0.0, 0.0, 0.0, gains, (0.0, 50.0)) == 0.0
    raw = pid_pressure_unclamped(1.0, 0.2, 0.1, 0.05,
                                 PidGains(K_p=10.0, K_i=2.0, K_d=1.0))
    assert raw == pytest.approx(10.0 * 0.8 - 1.0 * 0.1 + 2.0 * 0.05)


def test_zoh_discretization_matches_series(geom40, params40):
    """exp(A T) via scipy must match its truncated Taylor series."""
    period = 1e-3
    ad, bd = _torsional_zoh(geom40, params40, period)
    a = np.array([[0.0, 1.0],
                  [-params40.k_t / params40.I_l, -params40.c_t / params40.I_l]])
    series = np.eye(2)
    term = np.eye(2)
    for n in range(1, 30):
        term = term @ (a * period) / n
        series = series + term
    assert np.allclose(ad, series, rtol=1e-10)
    assert bd.shape == (2, 1)


def test_auto_tune_produces_stable_positive_gains(geom40, params40):
    gains = auto_tune(geom40, params40)
    assert gains.K_p > 0 and gains.K_i > 0 and gains.K_d > 0
    ad, bd = _torsional_zoh(geom40, params40, 1.0 / 100.0)
    assert _spectral_radius_pid(ad, bd, gains, 1.0 / 100.0) < 1.0
    # doubled proportional gain alone sits at the margin found by bisection
    rho2 = _spectral_radius_pid(ad, bd, PidGains(K_p=2.0 * gains.K_p),
                                1.0 / 100.0)
    assert rho2 == pytest.approx(1.0, abs=1e-3)


def test_closed_loop_tracks_step(geom40, params40):
    gains = auto_tune(geom40, params40)
    ref = ReferenceSignal(kind="step", segments=((1.5, deg_to_rad(30.0)),))
    res = closed_loop_sim("nonlinear", gains, ref, 100.0, 1.5, geom40,
                          params40)
    assert abs(res.theta[-1] - deg_to_rad(30.0)) < deg_to_rad(0.5)
    assert res.pressure.min() >= 0.0
    assert res.pressure.max() <= psi_to_pa(10.0)


def test_closed_loop_linearized_plant_runs(geom40, params40):
    gains = auto_tune(geom40, params40)
    ref = ReferenceSignal(kind="step", segments=((0.5, deg_to_rad(20.0)),))
    res = closed_loop_sim("linearized", gains, ref, 100.0, 0.5, geom40,
                          params40)
    assert abs(res.theta[-1] - deg_to_rad(20.0)) < deg_to_rad(0.5)


def test_rmsd():
    a = np.array([0.0, 1.0, 2.0])
    b = np.array([0.0, 0.0, 0.0])
    assert rmsd(a, b) == pytest.approx(math.sqrt(5.0 / 3.0))
    with pytest.raises(ValueError):
        rmsd(a, np.array([1.0, 2.0]))


def test_gains_validation():
    with pytest.raises(ValueError):
        PidGains(K_p=float("nan"))
    g = PidGains(K_p=1.0, K_i=2.0, K_d=3.0)
    n = g.negated()
    assert (n.K_p, n.K_i, n.K_d) == (-1.0, -2.0, -3.0)
