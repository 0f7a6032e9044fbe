"""Request and response bodies of the workbench service.

Every analysis endpoint returns a ``TableResponse``: named CSV tables (the
deliverable data) plus a flat summary of scalar results. File-like inputs
travel as CSV text so the service stays stateless.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Request(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScheduleSegment(_Request):
    duration_s: float = Field(gt=0)
    value_psi: float = Field(ge=0)


class ScenarioSegment(_Request):
    duration_s: float = Field(gt=0)
    target_deg: float


class ScenarioBody(_Request):
    kind: Literal["step", "trajectory"]
    segments: list[ScenarioSegment] = Field(min_length=1)


class MaterialFitRequest(_Request):
    csv_text: str
    engineering: bool = False
    model: Literal["ogden", "linear"] = "ogden"
    mu_mpa: Optional[float] = None  # required for the ogden fit
    strain_cap: float = Field(default=0.1, gt=0)  # linear fit window


class MaterialEvalRequest(_Request):
    model: Literal["ogden", "neo_hookean", "linear"]
    mu_mpa: Optional[float] = None
    alpha: Optional[float] = None
    e_mpa: Optional[float] = None
    stretch_min: float = Field(default=0.5, gt=0)
    stretch_max: float = Field(default=3.0, gt=0)
    n_points: int = Field(default=101, ge=2)


class SimulateRequest(_Request):
    config: dict = Field(default_factory=dict)
    schedule: list[ScheduleSegment] = Field(min_length=1)
    output_every: int = Field(default=10, ge=1)  # decimation of the time grid


class ControlRequest(_Request):
    config: dict = Field(default_factory=dict)
    scenario_name: Optional[str] = None  # built-in scenario
    scenario: Optional[ScenarioBody] = None  # inline scenario
    plant: Literal["nonlinear", "linearized"] = "nonlinear"


class SweepRequest(_Request):
    config: dict = Field(default_factory=dict)
    gamma_deg: list[float] = Field(min_length=1)
    pressure_psi: list[float] = Field(min_length=1)


class LocusRequest(_Request):
    """Root-locus sweep of one gain; gains are unwinding-positive."""

    config: dict = Field(default_factory=dict)
    which: Literal["K_p", "K_i", "K_d"]
    grid: list[float] = Field(min_length=2)


class SysidRequest(_Request):
    kind: Literal["stiffness", "damping"]
    axis: Literal["axial", "torsional"] = "axial"
    csv_text: str
    k: Optional[float] = None  # damping fit: identified stiffness
    inertia: Optional[float] = None  # damping fit: m_l or I_l


class WorkspaceRequest(_Request):
    config: dict = Field(default_factory=dict)
    cases: list[int] = Field(default=[1, 2, 3, 4, 5], min_length=1)
    n_pressure: int = Field(default=15, ge=2)
    max_psi: float = Field(default=7.0, gt=0)


class TableResponse(BaseModel):
    tables: dict[str, str]  # filename -> CSV text
    summary: dict


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class ErrorBody(BaseModel):
    kind: Literal["config", "numeric"]
    message: str
