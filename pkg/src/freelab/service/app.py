"""HTTP service exposing the workbench analyses.

Every analysis endpoint is stateless: it takes the full config (plus any
data as CSV text) and returns named CSV tables with a scalar summary.
Config and input errors map to HTTP 422 with kind "config"; failures of
the numerical machinery map to HTTP 422 with kind "numeric".
"""

from __future__ import annotations

import io

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__, analysis, control, dynamics, materials, module_model, sysid
from ..config import (
    BUILTIN_SCENARIOS,
    WorkbenchConfig,
    parse_config,
    parse_scenario,
)
from ..errors import ConfigError, FreelabError
from ..tables import render_csv
from ..units import deg_to_rad, psi_to_pa, rad_to_deg
from . import schemas


def _resolve_gains(cfg: WorkbenchConfig) -> control.PidGains:
    """Gains in the unwinding-positive frame, auto-tuned when not given."""
    if cfg.gains is not None:
        return cfg.gains
    return control.auto_tune(cfg.geometry, cfg.params,
                             control_rate=cfg.control_rate)


def _material_fit(req: schemas.MaterialFitRequest) -> schemas.TableResponse:
    samples = materials.parse_stress_strain(
        io.StringIO(req.csv_text), engineering=req.engineering
    )
    if req.model == "ogden":
        if req.mu_mpa is None:
            raise ConfigError("mu_mpa is required for the ogden fit",
                              key="mu_mpa")
        params, rmsd = materials.fit_ogden(samples, mu_fixed=req.mu_mpa * 1e6)
        rows = [
            (s.stretch, s.true_stress,
             materials.ogden_uniaxial_stress(s.stretch, params))
            for s in samples
        ]
        table = render_csv(
            ("stretch", "true_stress_pa", "model_stress_pa"), rows
        )
        return schemas.TableResponse(
            tables={"material_fit.csv": table},
            summary={"model": "ogden", "mu_pa": params.mu,
                     "alpha": params.alpha, "rmsd_pa": rmsd},
        )
    pairs = [(s.stretch - 1.0, s.true_stress) for s in samples]
    e_mod = materials.fit_linear_modulus(pairs, strain_cap=req.strain_cap)
    rows = [(x, y, e_mod * x) for x, y in pairs]
    table = render_csv(("strain", "true_stress_pa", "model_stress_pa"), rows)
    return schemas.TableResponse(
        tables={"material_fit.csv": table},
        summary={"model": "linear", "e_pa": e_mod,
                 "strain_cap": req.strain_cap},
    )


def _material_eval(req: schemas.MaterialEvalRequest) -> schemas.TableResponse:
    if req.stretch_max <= req.stretch_min:
        raise ConfigError("stretch_max must exceed stretch_min",
                          key="stretch_max")
    if req.model == "ogden":
        if req.mu_mpa is None or req.alpha is None:
            raise ConfigError("ogden eval needs mu_mpa and alpha", key="model")
        p = materials.OgdenParams(mu=req.mu_mpa * 1e6, alpha=req.alpha)
        stress = lambda lam: materials.ogden_uniaxial_stress(lam, p)
    elif req.model == "neo_hookean":
        if req.mu_mpa is None:
            raise ConfigError("neo_hookean eval needs mu_mpa", key="model")
        p = materials.NeoHookeanParams(mu=req.mu_mpa * 1e6)
        stress = lambda lam: materials.neo_hookean_uniaxial_stress(lam, p)
    else:
        if req.e_mpa is None:
            raise ConfigError("linear eval needs e_mpa", key="model")
        p = materials.LinearParams(E=req.e_mpa * 1e6)
        stress = lambda lam: materials.linear_uniaxial_stress(lam - 1.0, p)
    rows = []
    for i in range(req.n_points):
        lam = req.stretch_min + (req.stretch_max - req.stretch_min) * i / (
            req.n_points - 1
        )
        rows.append((lam, stress(lam)))
    table = render_csv(("stretch", "true_stress_pa"), rows)
    return schemas.TableResponse(
        tables={"material_eval.csv": table}, summary={"model": req.model}
    )


def _simulate(req: schemas.SimulateRequest) -> schemas.TableResponse:
    cfg = parse_config(req.config)
    schedule = [(seg.duration_s, psi_to_pa(seg.value_psi))
                for seg in req.schedule]
    signal = dynamics.PressureSignal.steps(schedule, p_min=cfg.p_min,
                                           p_max=cfg.p_max)
    t_end = sum(d for d, _ in schedule)
    comp = analysis.open_loop_comparison(
        cfg.geometry, cfg.params, signal, t_end, dt=cfg.dt
    )
    nl, lin = comp.nonlinear, comp.linearized
    rows = []
    for i in range(0, nl.t.size, req.output_every):
        rows.append(
            (
                nl.t[i],
                nl.pressure[i],
                nl.states[i, 0],
                nl.states[i, 2],
                lin.states[i, 0],
                lin.states[i, 2],
                100.0 * comp.r_drift[i],
                100.0 * comp.gamma_drift[i],
            )
        )
    table = render_csv(
        ("t_s", "pressure_pa", "s_nonlinear_m", "phi_nonlinear_rad",
         "s_linearized_m", "phi_linearized_rad", "r_change_pct",
         "gamma_change_pct"),
        rows,
    )
    summary = {
        "t_end_s": t_end,
        "max_r_change_pct": 100.0 * float(abs(comp.r_drift).max()),
        "max_gamma_change_pct": 100.0 * float(abs(comp.gamma_drift).max()),
    }
    p_final = schedule[-1][1]
    if p_final > 0:
        summary["linearized_pressure_excess_pct"] = 100.0 * (
            analysis.linearization_pressure_excess(p_final, cfg.geometry,
                                                   cfg.params)
        )
    return schemas.TableResponse(tables={"simulate.csv": table},
                                 summary=summary)


def _control(req: schemas.ControlRequest) -> schemas.TableResponse:
    cfg = parse_config(req.config)
    if (req.scenario_name is None) == (req.scenario is None):
        raise ConfigError("give exactly one of scenario_name or scenario",
                          key="scenario")
    if req.scenario_name is not None:
        if req.scenario_name not in BUILTIN_SCENARIOS:
            raise ConfigError(
                f"unknown scenario '{req.scenario_name}'; built-ins: "
                f"{sorted(BUILTIN_SCENARIOS)}",
                key="scenario_name",
            )
        reference = parse_scenario(BUILTIN_SCENARIOS[req.scenario_name])
    else:
        reference = parse_scenario(req.scenario.model_dump())
    gains = _resolve_gains(cfg)
    result = control.closed_loop_sim(
        req.plant,
        gains,
        reference,
        control_rate=cfg.control_rate,
        t_end=reference.duration(),
        geom=cfg.geometry,
        params=cfg.params,
        dt=cfg.dt,
        bounds=(cfg.p_min, cfg.p_max),
    )
    rows = [
        (result.t[i], result.theta_d[i], result.theta[i], result.s[i],
         result.pressure[i])
        for i in range(result.t.size)
    ]
    table = render_csv(
        ("t_s", "theta_target_rad", "theta_rad", "s_m", "pressure_pa"), rows
    )
    rmsd_rad = control.rmsd(result.theta, result.theta_d)
    full_scale = max(abs(t) for _, t in reference.segments)
    return schemas.TableResponse(
        tables={"control.csv": table},
        summary={
            "plant": req.plant,
            "kind": reference.kind,
            "gains": {"K_p": gains.K_p, "K_i": gains.K_i, "K_d": gains.K_d},
            "rmsd_rad": rmsd_rad,
            "rmsd_deg": rad_to_deg(rmsd_rad),
            "rmsd_pct_full_scale": 100.0 * rmsd_rad / full_scale,
            "max_pressure_pa": float(result.pressure.max()),
            "min_pressure_pa": float(result.pressure.min()),
        },
    )


def _sweep(req: schemas.SweepRequest) -> schemas.TableResponse:
    cfg = parse_config(req.config)
    rows_out = []
    sweep_rows = dynamics.sweep_winding(
        cfg.geometry,
        [deg_to_rad(g) for g in req.gamma_deg],
        [psi_to_pa(p) for p in req.pressure_psi],
        params_fn=lambda geom: cfg.params
        if abs(geom.Gamma - cfg.geometry.Gamma) < 1e-12
        else dynamics.default_lumped_params(geom),
    )
    n_ok = 0
    for row in sweep_rows:
        if row.status == "ok":
            n_ok += 1
        rows_out.append(
            (rad_to_deg(row.Gamma), row.P, row.tau, row.lambda_ext,
             row.F_block, row.M_block, row.status)
        )
    table = render_csv(
        ("gamma_deg", "pressure_pa", "tau_rad_per_m", "lambda_ext",
         "f_block_n", "m_block_nm", "status"),
        rows_out,
    )
    return schemas.TableResponse(
        tables={"sweep.csv": table},
        summary={"n_rows": len(rows_out), "n_ok": n_ok},
    )


def _locus(req: schemas.LocusRequest) -> schemas.TableResponse:
    cfg = parse_config(req.config)
    base = _resolve_gains(cfg).negated()  # equation-frame
    eq_grid = [-g for g in req.grid]
    rows = control.root_locus(base, cfg.geometry, cfg.params, req.which,
                              eq_grid)
    out = []
    for aligned_gain, row in zip(req.grid, rows):
        roots = row.roots
        out.append(
            (
                aligned_gain,
                roots[0].real, roots[0].imag,
                roots[1].real, roots[1].imag,
                roots[2].real, roots[2].imag,
                row.max_real,
                row.stable,
            )
        )
    table = render_csv(
        ("gain", "root1_re", "root1_im", "root2_re", "root2_im",
         "root3_re", "root3_im", "max_real", "stable"),
        out,
    )
    boundary = control.stability_boundary(base, cfg.geometry, cfg.params,
                                          req.which, eq_grid)
    return schemas.TableResponse(
        tables={"locus.csv": table},
        summary={
            "which": req.which,
            "boundary_gain": None if boundary is None else -boundary,
        },
    )


def _sysid(req: schemas.SysidRequest) -> schemas.TableResponse:
    if req.kind == "stiffness":
        samples = sysid.parse_load_displacement(io.StringIO(req.csv_text),
                                                req.axis)
        fit = sysid.fit_stiffness(samples)
        rows = [(s.displacement, s.load, fit.k * s.displacement)
                for s in samples]
        table = render_csv(("displacement", "load", "model_load"), rows)
        return schemas.TableResponse(
            tables={"sysid_stiffness.csv": table},
            summary={"axis": req.axis, "k": fit.k,
                     "residual_rms": fit.residual_rms},
        )
    if req.k is None or req.inertia is None:
        raise ConfigError("damping fit needs k and inertia", key="kind")
    trace = sysid.parse_vibration(io.StringIO(req.csv_text), req.axis)
    fit = sysid.fit_damping(trace, k=req.k, inertia=req.inertia)
    rows = list(zip(trace.t.tolist(), trace.displacement.tolist()))
    table = render_csv(("t", "displacement"), rows)
    return schemas.TableResponse(
        tables={"sysid_damping.csv": table},
        summary={"axis": req.axis, "c": fit.c, "zeta": fit.zeta,
                 "log_decrement": fit.decrement, "n_peaks": fit.n_peaks},
    )


def _workspace(req: schemas.WorkspaceRequest) -> schemas.TableResponse:
    cfg = parse_config(req.config)
    for case in req.cases:
        if case not in (1, 2, 3, 4, 5):
            raise ConfigError(f"case {case} outside 1..5", key="cases")
    module = module_model.ModuleGeometry(
        actuator=cfg.geometry,
        half_diagonal=cfg.module_half_diagonal,
        params=cfg.params,
    )
    grid = [
        psi_to_pa(req.max_psi) * i / (req.n_pressure - 1)
        for i in range(req.n_pressure)
    ]
    result = module_model.workspace(module, cases=req.cases,
                                    pressure_grid=grid)
    point_rows = []
    failure_rows = []
    row_of_point = {}
    for idx, pt in enumerate(result.points):
        if pt.status == "ok":
            row_of_point[idx] = len(point_rows)
            point_rows.append(
                (pt.case_id, pt.variation, pt.pressure, pt.pose.x, pt.pose.y,
                 pt.pose.z, pt.pose.twist)
            )
        else:
            failure_rows.append(
                (pt.case_id, pt.variation, pt.pressure, pt.status)
            )
    path_rows = []
    for (case_id, variation), indices in sorted(result.polylines.items()):
        for seq, idx in enumerate(indices):
            path_rows.append((case_id, variation, seq, row_of_point[idx]))
    tables = {
        "workspace.csv": render_csv(
            ("case", "variation", "pressure_pa", "x", "y", "z", "twist"),
            point_rows,
        ),
        "workspace_paths.csv": render_csv(
            ("case", "variation", "seq", "point_row"), path_rows
        ),
    }
    if failure_rows:
        tables["workspace_failures.csv"] = render_csv(
            ("case", "variation", "pressure_pa", "message"), failure_rows
        )
    return schemas.TableResponse(
        tables=tables,
        summary={
            "n_points": len(point_rows),
            "n_failures": len(failure_rows),
            "cases": sorted(set(req.cases)),
        },
    )


def create_app() -> FastAPI:
    app = FastAPI(title="freelab", version=__version__)

    @app.exception_handler(ConfigError)
    async def config_error(request, exc: ConfigError):
        return JSONResponse(
            status_code=422,
            content={"kind": "config", "message": str(exc)},
        )

    @app.exception_handler(FreelabError)
    async def numeric_error(request, exc: FreelabError):
        return JSONResponse(
            status_code=422,
            content={"kind": "numeric", "message": str(exc)},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/material/fit", response_model=schemas.TableResponse)
    def material_fit(req: schemas.MaterialFitRequest):
        return _material_fit(req)

    @app.post("/material/eval", response_model=schemas.TableResponse)
    def material_eval(req: schemas.MaterialEvalRequest):
        return _material_eval(req)

    @app.post("/simulate", response_model=schemas.TableResponse)
    def simulate(req: schemas.SimulateRequest):
        return _simulate(req)

    @app.post("/control", response_model=schemas.TableResponse)
    def control_run(req: schemas.ControlRequest):
        return _control(req)

    @app.post("/sweep", response_model=schemas.TableResponse)
    def sweep(req: schemas.SweepRequest):
        return _sweep(req)

    @app.post("/locus", response_model=schemas.TableResponse)
    def locus(req: schemas.LocusRequest):
        return _locus(req)

    @app.post("/sysid", response_model=schemas.TableResponse)
    def sysid_run(req: schemas.SysidRequest):
        return _sysid(req)

    @app.post("/workspace", response_model=schemas.TableResponse)
    def workspace_run(req: schemas.WorkspaceRequest):
        return _workspace(req)

    return app
