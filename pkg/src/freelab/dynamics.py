"""Lumped-parameter dynamics of a single FREE.

Equations of motion for the free end (mass m_l, inertia I_l):

    m_l s''   = F_l - k_e s - c_e s' + pi r^2 P (1 - 2 cot^2 gamma)
    I_l phi'' = M_l - k_t phi - c_t phi' - 2 pi r^3 P cot(gamma) * handedness

with (r, gamma) evaluated from the fiber kinematics at the current (s, phi).
Pressurization therefore unwinds the helix: a handedness +1 FREE rotates in
the negative phi direction under positive pressure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kinematics
from .errors import DegenerateAngle, FreelabError, NoConvergence, StepFailure
from .kinematics import FreeGeometry, configuration, fiber_length, wrap_angle
from .units import psi_to_pa


@dataclass(frozen=True)
class LumpedParams:
    """Stiffness, damping, and end-cap inertia of the lumped model."""

    k_e: float  # axial stiffness, N/m
    k_t: float  # torsional stiffness, N*m/rad
    c_e: float  # axial damping, N*s/m
    c_t: float  # torsional damping, N*m*s/rad
    m_l: float  # end-cap mass, kg
    I_l: float  # end-cap mass moment of inertia, kg*m^2

    def __post_init__(self):
        for name in ("k_e", "k_t", "c_e", "c_t", "m_l", "I_l"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class LoadCondition:
    """External axial force and moment applied to the end cap."""

    F_l: float = 0.0
    M_l: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.F_l) and math.isfinite(self.M_l)):
            raise ValueError("loads must be finite")


NO_LOAD = LoadCondition()


@dataclass(frozen=True)
class DynamicState:
    s: float = 0.0
    s_dot: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.s_dot, self.phi, self.phi_dot])


class PressureSignal:
    """Time-to-pressure mapping with saturation bounds [p_min, p_max] (Pa)."""

    def __init__(self, fn: Callable[[float], float], p_min: float = 0.0,
                 p_max: float = psi_to_pa(10.0)):
        if p_min < 0:
            raise ValueError("p_min must be >= 0 (no vacuum)")
        if p_max < p_min:
            raise ValueError("p_max must be >= p_min")
        self._fn = fn
        self.p_min = p_min
        self.p_max = p_max

    def __call__(self, t: float) -> float:
        return min(max(self._fn(t), self.p_min), self.p_max)

    @classmethod
    def constant(cls, value: float, p_min: float = 0.0,
                 p_max: float = psi_to_pa(10.0)) -> "PressureSignal":
        return cls(lambda t: value, p_min=p_min, p_max=p_max)

    @classmethod
    def steps(cls, schedule: Sequence[tuple[float, float]], p_min: float = 0.0,
              p_max: float = psi_to_pa(10.0)) -> "PressureSignal":
        """Piecewise-constant signal from (duration, value) segments."""
        bounds = []
        t_acc = 0.0
        for duration, value in schedule:
            if duration <= 0:
                raise ValueError("segment durations must be positive")
            t_acc += duration
            bounds.append((t_acc, value))

        def fn(t: float) -> float:
            for t_end, value in bounds:
                if t < t_end:
                    return value
            return bounds[-1][1] if bounds else 0.0

        return cls(fn, p_min=p_min, p_max=p_max)


def default_lumped_params(
    geom: FreeGeometry,
    youngs: float = 1.18e6,
    shear: float = 0.393e6,
    fiber_stiffening: float = 40.0,
    zeta: float = 0.1,
    m_l: float = 0.02,
    cap_radius: float = 0.02,
) -> LumpedParams:
    """Canonical lumped parameters derived from geometry and elastomer moduli.

    Base stiffnesses come from the tube cross section (k_e = E A / L,
    k_t = mu J / L); the fiber_stiffening factor accounts for the fiber
    winding, which dominates the measured end stiffness of a real FREE.
    Without it the bare-elastomer values (about 175 N/m and 1.6e-3
    N*m/rad for the canonical tube) admit no static equilibrium above
    roughly 0.5 psi, far short of the 0-7 psi working range; the default
    factor of 40 keeps the 30 deg actuator's fold point above 7 psi.
    Damping is set by a damping ratio zeta on each axis.
    """
    ro, ri = geom.R, geom.inner_radius
    area = math.pi * (ro**2 - ri**2)
    j_polar = math.pi / 2.0 * (ro**4 - ri**4)
    k_e = fiber_stiffening * youngs * area / geom.L
    k_t = fiber_stiffening * shear * j_polar / geom.L
    i_l = m_l * cap_radius**2 / 2.0
    return LumpedParams(
        k_e=k_e,
        k_t=k_t,
        c_e=2.0 * zeta * math.sqrt(k_e * m_l),
        c_t=2.0 * zeta * math.sqrt(k_t * i_l),
        m_l=m_l,
        I_l=i_l,
    )


def elastomer_force(s: float, s_dot: float, params: LumpedParams) -> float:
    """Axial elastomer reaction F_e = -k_e s - c_e s'."""
    return -params.k_e * s - params.c_e * s_dot


def elastomer_moment(phi: float, phi_dot: float, params: LumpedParams) -> float:
    """Torsional elastomer reaction M_e = -k_t phi - c_t phi'."""
    return -params.k_t * phi - params.c_t * phi_dot


def _check_gamma(gamma: float):
    if not 0.0 < gamma < math.pi / 2.0:
        raise DegenerateAngle(f"winding angle {gamma:g} rad outside (0, pi/2)")


def pressure_force(r: float, gamma: float, P: float) -> float:
    """Axial pressure term pi r^2 P (1 - 2 cot^2 gamma)."""
    _check_gamma(gamma)
    cot = 1.0 / math.tan(gamma)
    return math.pi * r * r * P * (1.0 - 2.0 * cot * cot)


def pressure_moment(r: float, gamma: float, P: float, handedness: int = 1) -> float:
    """Torsional pressure term -2 pi r^3 P cot(gamma), signed by handedness."""
    _check_gamma(gamma)
    return -2.0 * math.pi * r**3 * P / math.tan(gamma) * handedness


def eom_rhs(
    state: DynamicState,
    P: float,
    geom: FreeGeometry,
    params: LumpedParams,
    load: LoadCondition = NO_LOAD,
) -> tuple[float, float]:
    """Nonlinear accelerations (s'', phi'') at the given state and pressure."""
    conf = configuration(geom, state.s, state.phi)
    s_dd = (
        load.F_l
        + elastomer_force(state.s, state.s_dot, params)
        + pressure_force(conf.r, conf.gamma, P)
    ) / params.m_l
    phi_dd = (
        load.M_l
        + elastomer_moment(state.phi, state.phi_dot, params)
        + pressure_moment(conf.r, conf.gamma, P, geom.handedness)
    ) / params.I_l
    return s_dd, phi_dd


def linearized_rhs(
    state: DynamicState,
    P: float,
    geom: FreeGeometry,
    params: LumpedParams,
    load: LoadCondition = NO_LOAD,
) -> tuple[float, float]:
    """Accelerations with r and gamma frozen at their initial values R, Gamma."""
    s_dd = (
        load.F_l
        + elastomer_force(state.s, state.s_dot, params)
        + pressure_force(geom.R, geom.Gamma, P)
    ) / params.m_l
    phi_dd = (
        load.M_l
        + elastomer_moment(state.phi, state.phi_dot, params)
        + pressure_moment(geom.R, geom.Gamma, P, geom.handedness)
    ) / params.I_l
    return s_dd, phi_dd


RhsFn = Callable[[DynamicState, float, FreeGeometry, LumpedParams, LoadCondition],
                 tuple[float, float]]


def _deriv(rhs: RhsFn, y: np.ndarray, P: float, geom, params, load) -> np.ndarray:
    state = DynamicState(s=y[0], s_dot=y[1], phi=y[2], phi_dot=y[3])
    s_dd, phi_dd = rhs(state, P, geom, params, load)
    return np.array([y[1], s_dd, y[3], phi_dd])


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled trajectory of (t, state, P)."""

    t: np.ndarray
    states: np.ndarray  # shape (n, 4): s, s_dot, phi, phi_dot
    pressure: np.ndarray


def rk4_step(rhs: RhsFn, y: np.ndarray, t: float, dt: float,
             pressure: Callable[[float], float], geom, params, load) -> np.ndarray:
    p0 = pressure(t)
    p_half = pressure(t + dt / 2.0)
    p1 = pressure(t + dt)
    k1 = _deriv(rhs, y, p0, geom, params, load)
    k2 = _deriv(rhs, y + dt / 2.0 * k1, p_half, geom, params, load)
    k3 = _deriv(rhs, y + dt / 2.0 * k2, p_half, geom, params, load)
    k4 = _deriv(rhs, y + dt * k3, p1, geom, params, load)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    rhs: RhsFn,
    initial: DynamicState,
    pressure: PressureSignal,
    t_end: float,
    dt: float = 1e-4,
    geom: FreeGeometry = None,
    params: LumpedParams = None,
    load: LoadCondition = NO_LOAD,
) -> TimeSeries:
    """Fixed-step 4th-order integration of the chosen right-hand side."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    n = int(round(t_end / dt))
    t = np.arange(n + 1) * dt
    states = np.empty((n + 1, 4))
    p_out = np.empty(n + 1)
    y = initial.as_array()
    states[0] = y
    p_out[0] = pressure(0.0)
    for i in range(n):
        ti = t[i]
        try:
            y = rk4_step(rhs, y, ti, dt, pressure, geom, params, load)
        except FreelabError as exc:
            raise StepFailure(f"integration failed at t={ti:g}: {exc}", t=ti) from exc
        if not np.all(np.isfinite(y)):
            raise StepFailure(f"non-finite state at t={t[i + 1]:g}", t=t[i + 1])
        states[i + 1] = y
        p_out[i + 1] = pressure(t[i + 1])
    return TimeSeries(t=t, states=states, pressure=p_out)


def _static_residual(s: float, phi: float, P: float, geom, params, load):
    conf = configuration(geom, s, phi)
    f1 = load.F_l - params.k_e * s + pressure_force(conf.r, conf.gamma, P)
    f2 = (load.M_l - params.k_t * phi
          + pressure_moment(conf.r, conf.gamma, P, geom.handedness))
    return f1, f2


def static_residual_norm(s, phi, P, geom, params, load=NO_LOAD) -> float:
    """Scaled norm of the static balance equations (dimensionless)."""
    f1, f2 = _static_residual(s, phi, P, geom, params, load)
    return math.hypot(f1 / (params.k_e * geom.L), f2 / params.k_t)


def _newton_static(s, phi, P, geom, params, load, tol, max_iter=60):
    """Damped Newton iteration; returns (s, phi) or None."""
    b = fiber_length(geom)
    theta = wrap_angle(geom)
    h_s = 1e-9 * geom.L
    h_phi = 1e-9 * max(theta, 1.0)

    def try_resid(ss, pp):
        try:
            return _static_residual(ss, pp, P, geom, params, load)
        except FreelabError:
            return None

    r0 = try_resid(s, phi)
    if r0 is None:
        return None
    for _ in range(max_iter):
        norm0 = math.hypot(r0[0] / (params.k_e * geom.L), r0[1] / params.k_t)
        if norm0 < tol:
            return s, phi
        ra = try_resid(s + h_s, phi)
        rb = try_resid(s, phi + h_phi)
        if ra is None or rb is None:
            return None
        j = np.array(
            [
                [(ra[0] - r0[0]) / h_s, (rb[0] - r0[0]) / h_phi],
                [(ra[1] - r0[1]) / h_s, (rb[1] - r0[1]) / h_phi],
            ]
        )
        try:
            step = np.linalg.solve(j, -np.array(r0))
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-8:
            s_new = s + lam * step[0]
            phi_new = phi + lam * step[1]
            # keep the trial inside the feasible domain
            if (geom.L + s_new < b and theta + geom.handedness * phi_new > 0
                    and geom.L + s_new > 0):
                r_new = try_resid(s_new, phi_new)
                if r_new is not None:
                    norm_new = math.hypot(
                        r_new[0] / (params.k_e * geom.L), r_new[1] / params.k_t
                    )
                    if norm_new < norm0:
                        s, phi, r0 = s_new, phi_new, r_new
                        break
            lam /= 2.0
        else:
            return None
    norm_final = math.hypot(r0[0] / (params.k_e * geom.L), r0[1] / params.k_t)
    return (s, phi) if norm_final < tol else None


def static_equilibrium(
    P: float,
    geom: FreeGeometry,
    params: LumpedParams,
    load: LoadCondition = NO_LOAD,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Static (s*, phi*) at pressure P, tracked by continuation from P = 0.

    Homotopy in pressure keeps the solution on the branch continuous with
    the rest state; pressure steps are halved adaptively when Newton fails.
    Raises NoConvergence when no equilibrium is reachable on that branch.
    """
    if P < 0:
        raise ValueError("pressure must be >= 0")
    s, phi = 0.0, 0.0
    if P == 0.0 and load == NO_LOAD:
        return s, phi
    p_now = 0.0
    dp = P if P > 0 else 1.0
    min_dp = max(P, 1.0) * 1e-6
    # Solve the load-only problem first, then continue in pressure.
    sol = _newton_static(s, phi, 0.0, geom, params, load, tol)
    if sol is None:
        raise NoConvergence(
            "no equilibrium under the external load alone",
            best_residual=static_residual_norm(s, phi, 0.0, geom, params, load),
        )
    s, phi = sol
    while p_now < P:
        p_try = min(p_now + dp, P)
        sol = _newton_static(s, phi, p_try, geom, params, load, tol)
        if sol is None:
            dp /= 2.0
            if dp < min_dp:
                raise NoConvergence(
                    f"continuation stalled at P = {p_now:g} Pa "
                    f"(target {P:g} Pa)",
                    best_residual=static_residual_norm(
                        s, phi, p_now, geom, params, load
                    ),
                )
            continue
        s, phi = sol
        p_now = p_try
        dp *= 1.5
    return s, phi


def blocked_reactions(P: float, geom: FreeGeometry) -> tuple[float, float]:
    """Axial force and moment with both ends fixed (s = phi = 0)."""
    return (
        pressure_force(geom.R, geom.Gamma, P),
        pressure_moment(geom.R, geom.Gamma, P, geom.handedness),
    )


MAGIC_ANGLE = math.atan(math.sqrt(2.0))  # blocked axial force vanishes here


@dataclass(frozen=True)
class SweepRow:
    Gamma: float
    P: float
    tau: float | None  # rotation per unit length, phi*/l
    lambda_ext: float | None  # l/L
    F_block: float
    M_block: float
    status: str  # "ok" or "infeasible"


def sweep_winding(
    geom_template: FreeGeometry,
    Gamma_grid: Sequence[float],
    P_grid: Sequence[float],
    params_fn: Callable[[FreeGeometry], LumpedParams] = None,
) -> list[SweepRow]:
    """Quasi-static winding-angle sweep.

    Free-end rotation/extension come from static_equilibrium, blocked
    reactions from blocked_reactions. Grid points with no static equilibrium
    are reported with status "infeasible" rather than aborting the sweep.
    """
    if params_fn is None:
        params_fn = default_lumped_params
    rows = []
    for Gamma in Gamma_grid:
        geom = FreeGeometry(
            L=geom_template.L,
            inner_radius=geom_template.inner_radius,
            wall=geom_template.wall,
            Gamma=Gamma,
            handedness=geom_template.handedness,
            n_fibers=geom_template.n_fibers,
        )
        params = params_fn(geom)
        for P in P_grid:
            f_blk, m_blk = blocked_reactions(P, geom)
            try:
                s_star, phi_star = static_equilibrium(P, geom, params)
            except NoConvergence:
                rows.append(SweepRow(Gamma, P, None, None, f_blk, m_blk,
                                     "infeasible"))
                continue
            l = geom.L + s_star
            rows.append(
                SweepRow(Gamma, P, phi_star / l, l / geom.L, f_blk, m_blk, "ok")
            )
    return rows
