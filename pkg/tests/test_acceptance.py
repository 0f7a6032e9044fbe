"""Acceptance gate: one test per release criterion.

Each test prints a single CRITERION line on success; a pytest failure on
any test here means the release gate is closed.
"""

import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from freelab.analysis import linearization_pressure_excess, open_loop_comparison
from freelab.cli import main as cli_main
from freelab.control import ReferenceSignal, auto_tune, closed_loop_sim, rmsd
from freelab.dynamics import (
    DynamicState,
    LumpedParams,
    PressureSignal,
    blocked_reactions,
    default_lumped_params,
    eom_rhs,
    integrate,
    static_equilibrium,
)
from freelab.kinematics import (
    canonical_geometry,
    configuration,
    fiber_length,
    max_extension,
    wrap_angle,
)
from freelab.materials import (
    LinearParams,
    NeoHookeanParams,
    OgdenParams,
    StressStrainSample,
    fit_ogden,
    linear_uniaxial_stress,
    modulus_to_shore,
    neo_hookean_uniaxial_stress,
    ogden_energy,
    ogden_uniaxial_stress,
    shore_to_modulus,
)
from freelab.module_model import ModuleGeometry, enumerate_patterns, module_pose, workspace
from freelab.sysid import VibrationTrace, fit_damping
from freelab.units import deg_to_rad, psi_to_pa, rad_to_deg

from oracles import damped_oscillator_solution, static_grid_minima

STEP_REF = ReferenceSignal(
    kind="step",
    segments=((3.0, deg_to_rad(50.0)), (3.0, deg_to_rad(20.0)),
              (3.0, deg_to_rad(80.0))),
)
TRAJ_REF = ReferenceSignal(
    kind="trajectory",
    segments=((3.0, deg_to_rad(40.0)), (3.0, deg_to_rad(10.0)),
              (3.0, deg_to_rad(70.0))),
)
BOUNDS = (0.0, psi_to_pa(10.0))


@pytest.fixture(scope="module")
def gains(geom40, params40):
    return auto_tune(geom40, params40)


@pytest.fixture(scope="module")
def step_run(geom40, params40, gains):
    return closed_loop_sim("nonlinear", gains, STEP_REF, 100.0, 9.0, geom40,
                           params40, dt=1e-4, bounds=BOUNDS)


def _report(n, text):
    print(f"CRITERION {n:2d} PASS: {text}")


def test_criterion_01_kinematic_inextensibility(geom40):
    t0 = time.perf_counter()
    b = fiber_length(geom40)
    theta = wrap_angle(geom40)
    s_max = max_extension(geom40)
    worst = 0.0
    for i in range(50):
        s = -0.03 + (0.999 * s_max + 0.03) * i / 49
        for j in range(50):
            phi = -0.9 * theta + 1.1 * theta * j / 49
            conf = configuration(geom40, s, phi)
            worst = max(worst,
                        abs(conf.l**2 + (conf.r * conf.psi) ** 2 - b * b) / b**2)
    elapsed = time.perf_counter() - t0
    assert worst < 1e-10
    assert elapsed < 1.0
    _report(1, f"inextensibility residual {worst:.2e} over 50x50 grid "
               f"({elapsed:.2f} s)")


def test_criterion_02_magic_angle():
    t0 = time.perf_counter()
    P = psi_to_pa(3.0)

    def f(gamma_deg):
        geom = canonical_geometry(deg_to_rad(gamma_deg))
        return blocked_reactions(P, geom)[0]

    lo, hi = 50.0, 60.0
    assert f(lo) < 0 < f(hi)
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    found = 0.5 * (lo + hi)
    expected = rad_to_deg(math.atan(math.sqrt(2.0)))
    elapsed = time.perf_counter() - t0
    assert abs(found - expected) < 1e-6
    assert elapsed < 1.0
    _report(2, f"blocked-force zero at {found:.7f} deg "
               f"(arctan sqrt(2) = {expected:.7f} deg)")


def test_criterion_03_linearization_band(geom40, params40):
    t0 = time.perf_counter()
    P = psi_to_pa(1.0)
    comp = open_loop_comparison(
        geom40, params40, PressureSignal.constant(P), 2.0, dt=1e-4
    )
    max_r = 100.0 * float(np.abs(comp.r_drift).max())
    max_gamma = 100.0 * float(np.abs(comp.gamma_drift).max())
    excess = 100.0 * linearization_pressure_excess(P, geom40, params40)
    elapsed = time.perf_counter() - t0
    assert max_r <= 2.5
    assert max_gamma <= 2.5
    assert 0.0 <= excess <= 15.0
    assert elapsed < 10.0
    _report(3, f"at 1 psi: max r change {max_r:.2f}%, max gamma change "
               f"{max_gamma:.2f}%, linearized pressure excess {excess:.1f}%")


def test_criterion_04_step_scenario(geom40, params40, gains, step_run):
    t0 = time.perf_counter()
    res = step_run
    switch_errors = []
    for t_switch in (3.0, 6.0, 9.0):
        k = int(round(t_switch * 100.0)) - 1  # last sample before the switch
        switch_errors.append(abs(res.theta[k] - res.theta_d[k]))
    assert max(switch_errors) < deg_to_rad(0.5)
    assert res.pressure.min() >= BOUNDS[0] - 1e-12
    assert res.pressure.max() <= BOUNDS[1] + 1e-12
    rmsd_coarse = rmsd(res.theta, res.theta_d)
    res_fine = closed_loop_sim("nonlinear", gains, STEP_REF, 100.0, 9.0,
                               geom40, params40, dt=5e-5, bounds=BOUNDS)
    rmsd_fine = rmsd(res_fine.theta, res_fine.theta_d)
    change = abs(rmsd_fine - rmsd_coarse) / rmsd_coarse
    elapsed = time.perf_counter() - t0
    assert change < 0.005
    assert elapsed < 30.0
    _report(4, f"steady errors {[f'{rad_to_deg(e):.2e}' for e in switch_errors]} deg, "
               f"pressure within bounds, dt/2 RMSD change {100 * change:.2e}%")


def test_criterion_05_trajectory_scenario(geom40, params40, gains, step_run):
    t0 = time.perf_counter()
    res = closed_loop_sim("nonlinear", gains, TRAJ_REF, 100.0, 9.0, geom40,
                          params40, dt=1e-4, bounds=BOUNDS)
    traj_rmsd = rmsd(res.theta, res.theta_d)
    full_scale = deg_to_rad(70.0)
    step_rmsd = rmsd(step_run.theta, step_run.theta_d)
    elapsed = time.perf_counter() - t0
    assert traj_rmsd / full_scale < 0.03
    assert traj_rmsd < step_rmsd
    assert elapsed < 30.0
    _report(5, f"trajectory RMSD {100 * traj_rmsd / full_scale:.2f}% of full "
               f"scale, below step RMSD ({rad_to_deg(step_rmsd):.2f} deg)")


def test_criterion_06_material_suite():
    t0 = time.perf_counter()
    mu = 0.393e6
    og = OgdenParams(mu=mu, alpha=1.2)
    assert ogden_uniaxial_stress(1.0, og) == 0.0
    assert neo_hookean_uniaxial_stress(1.0, NeoHookeanParams(mu=mu)) == 0.0
    assert linear_uniaxial_stress(0.0, LinearParams(E=1.18e6)) == 0.0
    og2 = OgdenParams(mu=mu, alpha=2.0)
    nh = NeoHookeanParams(mu=mu)
    for i in range(200):
        lam = 0.5 + 2.5 * i / 199
        a = ogden_uniaxial_stress(lam, og2)
        b = neo_hookean_uniaxial_stress(lam, nh)
        if b != 0.0:
            assert abs(a - b) / abs(b) < 1e-12
    h = 1e-6
    for lam in (0.6, 1.5, 2.5):
        def psi(x):
            return ogden_energy(x, x**-0.5, x**-0.5, og)

        fd = lam * (psi(lam + h) - psi(lam - h)) / (2.0 * h)
        assert abs(ogden_uniaxial_stress(lam, og) - fd) / abs(fd) < 1e-6
    samples = [
        StressStrainSample(stretch=lam,
                           true_stress=ogden_uniaxial_stress(lam, og))
        for lam in [1.0 + 0.1 * i for i in range(1, 21)]
    ]
    fitted, _ = fit_ogden(samples, mu_fixed=mu)
    assert abs(fitted.alpha - 1.2) < 1e-3
    assert abs(shore_to_modulus(30.8) - 1.18e6) < 0.01e6
    assert abs(modulus_to_shore(1.18e6) - 30.8) < 0.2
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(6, f"constitutive identities, fit roundtrip (alpha = "
               f"{fitted.alpha:.5f}), and hardness anchors hold")


def test_criterion_07_integrator_order_and_passivity(geom40, params40):
    t0 = time.perf_counter()
    k, m, c = 50.0, 0.3, 0.6
    params = LumpedParams(k_e=k, k_t=1.0, c_e=c, c_t=1.0, m_l=m, I_l=1.0)

    def rhs(state, P, geom, prm, load):
        return ((-prm.k_e * state.s - prm.c_e * state.s_dot) / prm.m_l, 0.0)

    exact = damped_oscillator_solution(k, m, c, x0=0.01)
    errs = []
    for dt in (2e-3, 1e-3):
        ts = integrate(rhs, DynamicState(s=0.01), PressureSignal.constant(0.0),
                       1.0, dt, geom40, params)
        errs.append(abs(ts.states[-1, 0] - exact(1.0)))
    order = math.log2(errs[0] / errs[1])
    assert 3.5 < order < 4.5

    ts = integrate(eom_rhs, DynamicState(s=0.002, phi=0.3),
                   PressureSignal.constant(0.0), 10.0, 1e-4, geom40, params40)
    v = (0.5 * params40.m_l * ts.states[:, 1] ** 2
         + 0.5 * params40.I_l * ts.states[:, 3] ** 2
         + 0.5 * params40.k_e * ts.states[:, 0] ** 2
         + 0.5 * params40.k_t * ts.states[:, 2] ** 2)
    assert np.all(np.diff(v[::10]) <= 1e-9 * v[0])
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(7, f"empirical order {order:.2f}, energy non-increasing over 10 s")


def test_criterion_08_static_solver_vs_grid_oracle():
    t0 = time.perf_counter()
    pairs = [
        (20.0, psi_to_pa(0.5)),
        (40.0, psi_to_pa(1.0)),
        (40.0, psi_to_pa(7.0)),
        (70.0, psi_to_pa(3.0)),
        (70.0, psi_to_pa(7.0)),
    ]
    details = []
    for gamma_deg, P in pairs:
        geom = canonical_geometry(deg_to_rad(gamma_deg))
        params = default_lumped_params(geom)
        s_star, phi_star = static_equilibrium(P, geom, params)
        cells, (ds, dphi) = static_grid_minima(geom, params, P, n=150)
        assert cells, f"oracle found no root cell at ({gamma_deg}, {P})"
        dist = min(
            max(abs(s_star - s) / ds, abs(phi_star - phi) / dphi)
            for s, phi in cells
        )
        assert dist <= 1.0, (gamma_deg, P, dist)
        details.append(f"{gamma_deg:g}deg/{P / psi_to_pa(1.0):g}psi")
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(8, f"solver matches brute-force root cells at {', '.join(details)} "
               f"({elapsed:.1f} s)")


def test_criterion_09_sysid(geom40, params40):
    t0 = time.perf_counter()
    k, m, zeta = 100.0, 0.5, 0.1
    c_true = 2.0 * zeta * math.sqrt(k * m)
    x = damped_oscillator_solution(k, m, c_true, x0=0.01)
    t = np.arange(0.0, 2.0, 1e-3)
    trace = VibrationTrace(t=t, displacement=np.array([x(ti) for ti in t]))
    fit = fit_damping(trace, k=k, inertia=m)
    assert abs(fit.zeta - zeta) / zeta < 0.01

    ts = integrate(eom_rhs, DynamicState(s=0.002), PressureSignal.constant(0.0),
                   0.3, 1e-4, geom40, params40)
    fit2 = fit_damping(
        VibrationTrace(t=ts.t, displacement=ts.states[:, 0]),
        k=params40.k_e, inertia=params40.m_l,
    )
    err = abs(fit2.c - params40.c_e) / params40.c_e
    elapsed = time.perf_counter() - t0
    assert err < 0.02
    assert elapsed < 5.0
    _report(9, f"zeta recovered to {100 * abs(fit.zeta - zeta) / zeta:.2f}%, "
               f"roundtrip damping error {100 * err:.2f}%")


def test_criterion_10_module_suite():
    t0 = time.perf_counter()
    counts = [len(enumerate_patterns(c)) for c in (1, 2, 3, 4, 5)]
    assert counts == [1, 2, 4, 4, 4]

    modules = {}
    for angle in (30.0, 60.0):
        geom = canonical_geometry(deg_to_rad(angle))
        modules[angle] = ModuleGeometry(
            actuator=geom, half_diagonal=0.015,
            params=default_lumped_params(geom),
        )
    P = psi_to_pa(5.0)
    L = modules[30.0].actuator.L
    for angle, sign in ((30.0, -1.0), (60.0, 1.0)):
        pose = module_pose(modules[angle], enumerate_patterns(1, P)[0])
        assert abs(pose.x) < 1e-9 * L and abs(pose.y) < 1e-9 * L
        assert sign * pose.z > 0.0
    pose2 = module_pose(modules[30.0], enumerate_patterns(2, P)[0])
    assert abs(pose2.twist) > 0.0
    assert abs(pose2.x) < 1e-9 * L and abs(pose2.y) < 1e-9 * L
    pose4 = module_pose(modules[30.0], enumerate_patterns(4, P)[0])
    assert abs(pose4.x) < 1e-9 * L  # bend stays in the symmetry plane
    pattern = enumerate_patterns(3, psi_to_pa(4.0))[0]
    a = module_pose(modules[30.0], pattern)
    b = module_pose(modules[30.0], pattern.rotated(1))
    assert abs(b.x + a.y) < 1e-9 and abs(b.y - a.x) < 1e-9
    assert abs(b.z - a.z) < 1e-9

    n_points = 0
    for angle in (30.0, 60.0):
        result = workspace(modules[angle])
        assert all(pt.status == "ok" for pt in result.points)
        n_points += len(result.points)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(10, f"15 variations, case signs and symmetries hold, "
                f"{n_points} workspace points feasible ({elapsed:.1f} s)")


def test_criterion_11_cli_determinism(tmp_path):
    runner = CliRunner()
    args = ["sweep", "--gamma-deg", "30,60", "--pressure-psi", "0,3,7"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = runner.invoke(cli_main, args + ["--out", str(out)])
        assert res.exit_code == 0, res.output
        outs.append(out)
    manifests = [json.loads((o / "sweep_manifest.json").read_text())
                 for o in outs]
    assert manifests[0] == manifests[1]
    for f in sorted(p.name for p in outs[0].iterdir()):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    _report(11, "identical manifests give byte-identical outputs")
