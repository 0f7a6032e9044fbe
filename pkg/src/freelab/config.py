"""Workbench configuration with explicit unit suffixes.

Config files are YAML; every dimensional key carries its unit in the name
(e.g. ``length_mm``, ``max_psi``) and is converted to SI on load. Unknown
keys are rejected so that a typo never silently falls back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .control import PidGains, ReferenceSignal
from .dynamics import LumpedParams, default_lumped_params
from .errors import ConfigError
from .kinematics import FreeGeometry
from .units import deg_to_rad, psi_to_pa


def _section(data: dict, name: str, allowed: set[str], required: set[str] = frozenset()):
    sec = data.get(name)
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping", key=name)
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'", key=f"{name}.{key}")
    for key in required:
        if key not in sec:
            raise ConfigError(f"missing key '{name}.{key}'", key=f"{name}.{key}")
    return sec


def _num(sec: dict, section: str, key: str, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key '{section}.{key}'", key=f"{section}.{key}")
        return default
    value = sec[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"'{section}.{key}' must be a number", key=f"{section}.{key}")
    return float(value)


@dataclass(frozen=True)
class MaterialConfig:
    model: str  # "ogden", "neo_hookean", "linear"
    mu: float | None = None
    alpha: float | None = None
    E: float | None = None
    fiber_EA: float | None = None


@dataclass(frozen=True)
class WorkbenchConfig:
    geometry: FreeGeometry
    params: LumpedParams
    material: MaterialConfig
    gains: PidGains | None  # None -> auto-tune
    p_min: float
    p_max: float
    dt: float
    control_rate: float
    module_half_diagonal: float


def parse_config(data: dict) -> WorkbenchConfig:
    """Validate a config mapping and convert to SI objects."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {"geometry", "lumped", "material", "controller", "pressure",
             "integration", "module"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown section '{key}'", key=key)

    gsec = _section(
        data, "geometry",
        {"length_mm", "inner_diameter_mm", "wall_mm", "winding_angle_deg",
         "handedness", "n_fibers"},
        {"length_mm", "inner_diameter_mm", "wall_mm", "winding_angle_deg"},
    )
    handedness = gsec.get("handedness", 1)
    if handedness not in (-1, 1):
        raise ConfigError("'geometry.handedness' must be 1 or -1",
                          key="geometry.handedness")
    n_fibers = gsec.get("n_fibers", 6)
    try:
        geometry = FreeGeometry(
            L=_num(gsec, "geometry", "length_mm") * 1e-3,
            inner_radius=_num(gsec, "geometry", "inner_diameter_mm") * 1e-3 / 2.0,
            wall=_num(gsec, "geometry", "wall_mm") * 1e-3,
            Gamma=deg_to_rad(_num(gsec, "geometry", "winding_angle_deg")),
            handedness=int(handedness),
            n_fibers=int(n_fibers),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid geometry: {exc}", key="geometry") from exc

    msec = _section(data, "material",
                    {"model", "mu_mpa", "alpha", "e_mpa", "fiber_ea_n"})
    model = msec.get("model", "ogden")
    if model not in ("ogden", "neo_hookean", "linear"):
        raise ConfigError(f"unknown material model '{model}'", key="material.model")
    material = MaterialConfig(
        model=model,
        mu=_num(msec, "material", "mu_mpa", 0.393) * 1e6,
        alpha=_num(msec, "material", "alpha", 1.2),
        E=_num(msec, "material", "e_mpa", 1.18) * 1e6,
        fiber_EA=_num(msec, "material", "fiber_ea_n", 644.0),
    )

    lsec = _section(
        data, "lumped",
        {"k_e_n_per_m", "k_t_nm_per_rad", "c_e_ns_per_m", "c_t_nms_per_rad",
         "m_l_kg", "i_l_kg_m2", "fiber_stiffening", "damping_ratio"},
    )
    explicit = {"k_e_n_per_m", "k_t_nm_per_rad", "c_e_ns_per_m",
                "c_t_nms_per_rad", "m_l_kg", "i_l_kg_m2"}
    if explicit & set(lsec):
        if not explicit <= set(lsec):
            missing = sorted(explicit - set(lsec))
            raise ConfigError(
                f"either give all of {sorted(explicit)} or none; missing {missing}",
                key="lumped",
            )
        try:
            params = LumpedParams(
                k_e=_num(lsec, "lumped", "k_e_n_per_m"),
                k_t=_num(lsec, "lumped", "k_t_nm_per_rad"),
                c_e=_num(lsec, "lumped", "c_e_ns_per_m"),
                c_t=_num(lsec, "lumped", "c_t_nms_per_rad"),
                m_l=_num(lsec, "lumped", "m_l_kg"),
                I_l=_num(lsec, "lumped", "i_l_kg_m2"),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid lumped parameters: {exc}",
                              key="lumped") from exc
    else:
        params = default_lumped_params(
            geometry,
            youngs=material.E,
            shear=material.mu,
            fiber_stiffening=_num(lsec, "lumped", "fiber_stiffening", 40.0),
            zeta=_num(lsec, "lumped", "damping_ratio", 0.1),
        )

    csec = _section(data, "controller",
                    {"auto", "kp_pa_per_rad", "ki_pa_per_rad_s", "kd_pa_s_per_rad"})
    if csec.get("auto", "kp_pa_per_rad" not in csec):
        gains = None
    else:
        gains = PidGains(
            K_p=_num(csec, "controller", "kp_pa_per_rad", 0.0),
            K_i=_num(csec, "controller", "ki_pa_per_rad_s", 0.0),
            K_d=_num(csec, "controller", "kd_pa_s_per_rad", 0.0),
        )
        if gains.K_p == gains.K_i == gains.K_d == 0.0:
            raise ConfigError("controller gains are all zero", key="controller")

    psec = _section(data, "pressure", {"min_psi", "max_psi"})
    p_min = psi_to_pa(_num(psec, "pressure", "min_psi", 0.0))
    p_max = psi_to_pa(_num(psec, "pressure", "max_psi", 10.0))
    if p_min < 0:
        raise ConfigError("'pressure.min_psi' must be >= 0 (no vacuum)",
                          key="pressure.min_psi")
    if p_max <= p_min:
        raise ConfigError("'pressure.max_psi' must exceed min_psi",
                          key="pressure.max_psi")

    isec = _section(data, "integration", {"dt_s", "control_rate_hz"})
    dt = _num(isec, "integration", "dt_s", 1e-4)
    control_rate = _num(isec, "integration", "control_rate_hz", 100.0)
    if dt <= 0:
        raise ConfigError("'integration.dt_s' must be positive",
                          key="integration.dt_s")
    if control_rate <= 0:
        raise ConfigError("'integration.control_rate_hz' must be positive",
                          key="integration.control_rate_hz")

    modsec = _section(data, "module", {"half_diagonal_mm"})
    half_diag = _num(modsec, "module", "half_diagonal_mm", 15.0) * 1e-3

    return WorkbenchConfig(
        geometry=geometry,
        params=params,
        material=material,
        gains=gains,
        p_min=p_min,
        p_max=p_max,
        dt=dt,
        control_rate=control_rate,
        module_half_diagonal=half_diag,
    )


def load_config(path) -> WorkbenchConfig:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data if data is not None else {})


DEFAULT_CONFIG: dict = {
    "geometry": {
        "length_mm": 175.0,
        "inner_diameter_mm": 9.52,
        "wall_mm": 0.8,
        "winding_angle_deg": 40.0,
        "handedness": 1,
        "n_fibers": 6,
    },
}


# Built-in reference scenarios. The step targets are the cumulative result
# of commanding +50, -30, +60 degree steps; the trajectory scenario commands
# absolute angles 40, 10, 70 degrees over matched 3 s segments.
BUILTIN_SCENARIOS: dict[str, dict] = {
    "paper-step": {
        "kind": "step",
        "segments": [
            {"duration_s": 3.0, "target_deg": 50.0},
            {"duration_s": 3.0, "target_deg": 20.0},
            {"duration_s": 3.0, "target_deg": 80.0},
        ],
    },
    "paper-trajectory": {
        "kind": "trajectory",
        "segments": [
            {"duration_s": 3.0, "target_deg": 40.0},
            {"duration_s": 3.0, "target_deg": 10.0},
            {"duration_s": 3.0, "target_deg": 70.0},
        ],
    },
}


def parse_scenario(data: dict) -> ReferenceSignal:
    """Reference schedule from a scenario mapping."""
    if not isinstance(data, dict):
        raise ConfigError("scenario root must be a mapping")
    for key in data:
        if key not in {"kind", "segments"}:
            raise ConfigError(f"unknown scenario key '{key}'", key=key)
    kind = data.get("kind")
    if kind not in ("step", "trajectory"):
        raise ConfigError("scenario 'kind' must be 'step' or 'trajectory'",
                          key="kind")
    raw_segments = data.get("segments")
    if not isinstance(raw_segments, list) or not raw_segments:
        raise ConfigError("scenario 'segments' must be a non-empty list",
                          key="segments")
    segments = []
    for i, seg in enumerate(raw_segments):
        if not isinstance(seg, dict) or set(seg) != {"duration_s", "target_deg"}:
            raise ConfigError(
                f"segment {i} must have exactly duration_s and target_deg",
                key=f"segments[{i}]",
            )
        duration = seg["duration_s"]
        if not isinstance(duration, (int, float)) or duration <= 0:
            raise ConfigError(f"segment {i} duration_s must be positive",
                              key=f"segments[{i}].duration_s")
        segments.append((float(duration), deg_to_rad(float(seg["target_deg"]))))
    return ReferenceSignal(kind=kind, segments=tuple(segments))


def load_scenario(name_or_path: str) -> ReferenceSignal:
    """Built-in scenario by name, or a YAML scenario file by path."""
    if name_or_path in BUILTIN_SCENARIOS:
        return parse_scenario(BUILTIN_SCENARIOS[name_or_path])
    with open(name_or_path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {name_or_path}: {exc}") from exc
    return parse_scenario(data)
