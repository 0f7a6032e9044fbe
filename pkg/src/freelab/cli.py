"""Command-line front end.

Each subcommand is a thin client of the HTTP service: it assembles a
request, posts it (in-process by default, or to ``--server URL``), and
writes the returned CSV tables plus a JSON summary and a manifest sidecar
into the output directory. Nothing is written until the whole analysis has
succeeded, so an invalid config never leaves partial outputs behind.

Exit codes: 0 success, 2 config or input parse error, 3 numeric failure.
Set ``FREELAB_LOG`` (debug/info/warning/error) to control verbosity.
"""

from __future__ import annotations

import json
import logging
import os
import pathlib
import sys

import click
import httpx
import yaml

from . import __version__
from .config import BUILTIN_SCENARIOS, DEFAULT_CONFIG, parse_config, parse_scenario
from .errors import ConfigError
from .manifest import RunManifest, digest_bytes, digest_file, digest_mapping
from .service.app import create_app

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("freelab")


def _setup_logging():
    level = os.environ.get("FREELAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config_source(config_path):
    """(config mapping, digest) from a YAML file or the built-in default."""
    if config_path is None:
        return DEFAULT_CONFIG, digest_mapping(DEFAULT_CONFIG)
    try:
        raw = pathlib.Path(config_path).read_bytes()
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot read config {config_path}: {exc}")
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        _fail(EXIT_CONFIG, f"cannot parse config {config_path}: {exc}")
    if data is None:
        data = {}
    try:
        parse_config(data)  # fail fast, before any service round trip
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    return data, digest_bytes(raw)


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        client = httpx.Client(base_url=server, timeout=600.0)
    else:
        from fastapi.testclient import TestClient

        client = TestClient(create_app(), raise_server_exceptions=False)
    with client:
        try:
            response = client.post(path, json=payload)
        except httpx.HTTPError as exc:
            _fail(EXIT_NUMERIC, f"service request failed: {exc}")
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        body = {}
    if body.get("kind") == "numeric":
        _fail(EXIT_NUMERIC, body.get("message", "numeric failure"))
    if body.get("kind") == "config":
        _fail(EXIT_CONFIG, body.get("message", "invalid configuration"))
    # FastAPI request-validation errors arrive as {"detail": [...]}
    _fail(EXIT_CONFIG, f"request rejected: {body.get('detail', response.text)}")


def _emit(out_dir, subcommand: str, result: dict, config_digest: str,
          inputs: dict, parameters: dict):
    """Write tables, summary, and manifest; list outputs on stdout."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_name = f"{subcommand}_summary.json"
    outputs = sorted(result["tables"]) + [summary_name]
    manifest = RunManifest(
        subcommand=subcommand,
        tool_version=__version__,
        config_digest=config_digest,
        inputs=inputs,
        parameters=parameters,
        outputs=outputs,
    )
    for name, text in result["tables"].items():
        (out / name).write_text(text)
    (out / summary_name).write_text(
        json.dumps(result["summary"], indent=2, sort_keys=True) + "\n"
    )
    manifest.write(out / f"{subcommand}_manifest.json")
    for name in outputs + [f"{subcommand}_manifest.json"]:
        click.echo(str(out / name))
    log.info("%s: wrote %d files to %s", subcommand, len(outputs) + 1, out)


def _float_list(text: str, option: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        _fail(EXIT_CONFIG, f"{option} must be a comma-separated number list")


config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="YAML config file (built-in defaults when omitted).",
)
out_option = click.option(
    "--out", "out_dir", type=click.Path(file_okay=False), default=".",
    help="Output directory.",
)
server_option = click.option(
    "--server", default=None,
    help="Base URL of a running service (default: run in-process).",
)


@click.group()
@click.version_option(version=__version__, prog_name="freelab")
def main():
    """Modeling, simulation, and control workbench for fiber-reinforced
    elastomeric actuators."""
    _setup_logging()


@main.command()
@click.argument("action", type=click.Choice(["fit", "eval"]))
@click.option("--data", "data_path", type=click.Path(), default=None,
              help="Uniaxial test CSV (required for fit).")
@click.option("--engineering", is_flag=True,
              help="Data file holds strain,eng_stress_pa instead of "
                   "stretch,true_stress_pa.")
@click.option("--model", default="ogden",
              type=click.Choice(["ogden", "neo_hookean", "linear"]))
@click.option("--mu-mpa", type=float, default=None,
              help="Shear modulus in MPa.")
@click.option("--alpha", type=float, default=None, help="Ogden exponent.")
@click.option("--e-mpa", type=float, default=None,
              help="Young's modulus in MPa (linear model).")
@click.option("--strain-cap", type=float, default=0.1,
              help="Strain window for the linear fit.")
@click.option("--stretch-min", type=float, default=0.5)
@click.option("--stretch-max", type=float, default=3.0)
@click.option("--n-points", type=int, default=101)
@out_option
@server_option
def material(action, data_path, engineering, model, mu_mpa, alpha, e_mpa,
             strain_cap, stretch_min, stretch_max, n_points, out_dir, server):
    """Fit a constitutive model to test data, or tabulate model stress."""
    inputs = {}
    if action == "fit":
        if data_path is None:
            _fail(EXIT_CONFIG, "material fit requires --data")
        if model == "neo_hookean":
            _fail(EXIT_CONFIG,
                  "fit supports ogden or linear (neo_hookean is ogden with "
                  "alpha fixed at 2)")
        try:
            csv_text = pathlib.Path(data_path).read_text()
        except OSError as exc:
            _fail(EXIT_CONFIG, f"cannot read {data_path}: {exc}")
        inputs["data"] = digest_bytes(csv_text.encode())
        payload = {
            "csv_text": csv_text,
            "engineering": engineering,
            "model": model,
            "mu_mpa": mu_mpa,
            "strain_cap": strain_cap,
        }
        result = _post(server, "/material/fit", payload)
        parameters = {k: payload[k] for k in
                      ("engineering", "model", "mu_mpa", "strain_cap")}
    else:
        payload = {
            "model": model,
            "mu_mpa": mu_mpa,
            "alpha": alpha,
            "e_mpa": e_mpa,
            "stretch_min": stretch_min,
            "stretch_max": stretch_max,
            "n_points": n_points,
        }
        result = _post(server, "/material/eval", payload)
        parameters = dict(payload)
    _emit(out_dir, "material", result, digest_mapping({}), inputs, parameters)


@main.command()
@config_option
@click.option("--step", "steps", multiple=True, required=True,
              help="Schedule segment DURATION_S:VALUE_PSI (repeatable).")
@click.option("--output-every", type=int, default=10,
              help="Keep every Nth integration sample in the table.")
@out_option
@server_option
def simulate(config_path, steps, output_every, out_dir, server):
    """Open-loop pressure run: nonlinear and linearized models side by side."""
    config, config_digest = _load_config_source(config_path)
    schedule = []
    for item in steps:
        parts = item.split(":")
        if len(parts) != 2:
            _fail(EXIT_CONFIG, f"--step '{item}' must be DURATION_S:VALUE_PSI")
        try:
            duration, value = float(parts[0]), float(parts[1])
        except ValueError:
            _fail(EXIT_CONFIG, f"--step '{item}' must be numeric")
        schedule.append({"duration_s": duration, "value_psi": value})
    payload = {"config": config, "schedule": schedule,
               "output_every": output_every}
    result = _post(server, "/simulate", payload)
    _emit(out_dir, "simulate", result, config_digest, {},
          {"schedule": list(steps), "output_every": output_every})


@main.command()
@config_option
@click.option("--scenario", "scenario_ref", default="paper-step",
              help="Built-in scenario name or a YAML scenario file. "
                   f"Built-ins: {', '.join(sorted(BUILTIN_SCENARIOS))}.")
@click.option("--plant", default="nonlinear",
              type=click.Choice(["nonlinear", "linearized"]))
@out_option
@server_option
def control(config_path, scenario_ref, plant, out_dir, server):
    """Closed-loop rotation tracking with tracking metrics."""
    config, config_digest = _load_config_source(config_path)
    inputs = {}
    payload = {"config": config, "plant": plant}
    if scenario_ref in BUILTIN_SCENARIOS:
        payload["scenario_name"] = scenario_ref
        parameters = {"scenario": scenario_ref, "plant": plant}
    else:
        try:
            raw = pathlib.Path(scenario_ref).read_bytes()
        except OSError as exc:
            _fail(EXIT_CONFIG, f"cannot read scenario {scenario_ref}: {exc}")
        try:
            data = yaml.safe_load(raw)
            parse_scenario(data)
        except yaml.YAMLError as exc:
            _fail(EXIT_CONFIG, f"cannot parse scenario {scenario_ref}: {exc}")
        except ConfigError as exc:
            _fail(EXIT_CONFIG, str(exc))
        inputs["scenario"] = digest_bytes(raw)
        payload["scenario"] = data
        parameters = {"scenario": "file", "plant": plant}
    result = _post(server, "/control", payload)
    _emit(out_dir, "control", result, config_digest, inputs, parameters)


@main.command()
@config_option
@click.option("--gamma-deg", default="10,20,30,40,50,60,70,80",
              help="Comma-separated winding angles in degrees.")
@click.option("--pressure-psi", default="0,1,2,3,4,5,6,7",
              help="Comma-separated pressures in psi.")
@out_option
@server_option
def sweep(config_path, gamma_deg, pressure_psi, out_dir, server):
    """Winding-angle sweep: twist rate, extension, blocked reactions."""
    config, config_digest = _load_config_source(config_path)
    payload = {
        "config": config,
        "gamma_deg": _float_list(gamma_deg, "--gamma-deg"),
        "pressure_psi": _float_list(pressure_psi, "--pressure-psi"),
    }
    result = _post(server, "/sweep", payload)
    _emit(out_dir, "sweep", result, config_digest, {},
          {"gamma_deg": gamma_deg, "pressure_psi": pressure_psi})


@main.command()
@config_option
@click.option("--which", default="K_p",
              type=click.Choice(["K_p", "K_i", "K_d"]))
@click.option("--gain-min", type=float, default=0.0)
@click.option("--gain-max", type=float, required=True)
@click.option("--n-points", type=int, default=101)
@out_option
@server_option
def locus(config_path, which, gain_min, gain_max, n_points, out_dir, server):
    """Root locus of the linearized rotation loop along one gain."""
    config, config_digest = _load_config_source(config_path)
    if n_points < 2:
        _fail(EXIT_CONFIG, "--n-points must be at least 2")
    grid = [gain_min + (gain_max - gain_min) * i / (n_points - 1)
            for i in range(n_points)]
    payload = {"config": config, "which": which, "grid": grid}
    result = _post(server, "/locus", payload)
    _emit(out_dir, "locus", result, config_digest, {},
          {"which": which, "gain_min": gain_min, "gain_max": gain_max,
           "n_points": n_points})


@main.command()
@click.argument("action", type=click.Choice(["stiffness", "damping"]))
@click.option("--data", "data_path", type=click.Path(), required=True,
              help="stiffness: load,displacement CSV; damping: "
                   "t,displacement CSV.")
@click.option("--axis", default="axial",
              type=click.Choice(["axial", "torsional"]))
@click.option("--k", type=float, default=None,
              help="Identified stiffness (damping fit).")
@click.option("--inertia", type=float, default=None,
              help="End mass or inertia (damping fit).")
@out_option
@server_option
def sysid(action, data_path, axis, k, inertia, out_dir, server):
    """Identify stiffness or damping from experimental records."""
    try:
        csv_text = pathlib.Path(data_path).read_text()
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot read {data_path}: {exc}")
    payload = {"kind": action, "axis": axis, "csv_text": csv_text,
               "k": k, "inertia": inertia}
    result = _post(server, "/sysid", payload)
    _emit(out_dir, "sysid", result, digest_mapping({}),
          {"data": digest_bytes(csv_text.encode())},
          {"kind": action, "axis": axis, "k": k, "inertia": inertia})


@main.command()
@config_option
@click.option("--cases", default="1,2,3,4,5",
              help="Comma-separated actuation cases (1..5).")
@click.option("--n-pressure", type=int, default=15)
@click.option("--max-psi", type=float, default=7.0)
@out_option
@server_option
def workspace(config_path, cases, n_pressure, max_psi, out_dir, server):
    """Module end-effector workspace cloud and per-variation paths."""
    config, config_digest = _load_config_source(config_path)
    case_list = []
    for item in cases.split(","):
        try:
            case_list.append(int(item))
        except ValueError:
            _fail(EXIT_CONFIG, f"--cases entry '{item}' is not an integer")
    payload = {"config": config, "cases": case_list,
               "n_pressure": n_pressure, "max_psi": max_psi}
    result = _post(server, "/workspace", payload)
    _emit(out_dir, "workspace", result, config_digest, {},
          {"cases": cases, "n_pressure": n_pressure, "max_psi": max_psi})


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the workbench service."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
