"""PID pressure control of FREE rotation.

The controller acts on the unwinding-positive rotation angle
``theta = -handedness * phi``: positive pressure produces positive theta, so
positive gains track positive targets. Gains quoted in the equation frame of
the plant (where the pressure moment is -2 pi r^3 P cot gamma) are the
negatives of these; ``closed_loop_coefficients`` takes equation-frame gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .dynamics import (
    DynamicState,
    LoadCondition,
    LumpedParams,
    NO_LOAD,
    RhsFn,
    eom_rhs,
    linearized_rhs,
    rk4_step,
)
from .errors import DegenerateLeadingCoefficient, StepFailure, TimeOutOfRange
from .kinematics import FreeGeometry
from .units import psi_to_pa


@dataclass(frozen=True)
class PidGains:
    """Proportional / integral / derivative pressure gains.

    Units: K_p in Pa/rad, K_i in Pa/(rad s), K_d in Pa s/rad.
    """

    K_p: float = 0.0
    K_i: float = 0.0
    K_d: float = 0.0

    def __post_init__(self):
        for g in (self.K_p, self.K_i, self.K_d):
            if not math.isfinite(g):
                raise ValueError("gains must be finite")

    def negated(self) -> "PidGains":
        return PidGains(K_p=-self.K_p, K_i=-self.K_i, K_d=-self.K_d)


def pid_pressure(
    phi_d: float,
    phi: float,
    phi_dot: float,
    error_integral: float,
    gains: PidGains,
    bounds: tuple[float, float],
) -> float:
    """PID pressure command, clamped to bounds.

    P = K_p (phi_d - phi) - K_d phi_dot + K_i * integral of (phi_d - phi).
    The caller owns the integral state and must freeze it whenever
    ``pid_pressure_unclamped`` exits the bounds (conditional integration).
    """
    raw = pid_pressure_unclamped(phi_d, phi, phi_dot, error_integral, gains)
    lo, hi = bounds
    return min(max(raw, lo), hi)


def pid_pressure_unclamped(phi_d, phi, phi_dot, error_integral, gains: PidGains):
    return (
        gains.K_p * (phi_d - phi)
        - gains.K_d * phi_dot
        + gains.K_i * error_integral
    )


@dataclass(frozen=True)
class ClosedLoopCoefficients:
    """Coefficients of the linearized closed rotation loop.

    B phi''' + C phi'' + E phi' + F phi = forcing, after differentiating the
    integro-differential loop equation once. Built with the initial values
    R, Gamma and equation-frame gains.
    """

    B: float
    C: float
    D: float
    E: float
    F: float


def closed_loop_coefficients(
    gains: PidGains, geom: FreeGeometry, params: LumpedParams
) -> ClosedLoopCoefficients:
    """B = I_l, C = (-2 pi R^3 cot Gamma) K_d + c_t, D = (...) K_p,
    E = D + k_t, F = (...) K_i, with equation-frame gains."""
    coef = -2.0 * math.pi * geom.R**3 / math.tan(geom.Gamma)
    d = coef * gains.K_p
    return ClosedLoopCoefficients(
        B=params.I_l,
        C=coef * gains.K_d + params.c_t,
        D=d,
        E=d + params.k_t,
        F=coef * gains.K_i,
    )


def characteristic_roots(
    coeffs: ClosedLoopCoefficients,
) -> tuple[np.ndarray, bool]:
    """Roots of B x^3 + C x^2 + E x + F and a strict-stability verdict."""
    if coeffs.B == 0:
        raise DegenerateLeadingCoefficient("B (leading coefficient) is zero")
    poly = np.array([coeffs.B, coeffs.C, coeffs.E, coeffs.F])
    roots = np.sort_complex(np.roots(poly))
    stable = bool(np.all(roots.real < 0))
    return roots, stable


GainName = Literal["K_p", "K_i", "K_d"]


def _with_gain(gains: PidGains, which: GainName, value: float) -> PidGains:
    fields = {"K_p": gains.K_p, "K_i": gains.K_i, "K_d": gains.K_d}
    fields[which] = value
    return PidGains(**fields)


@dataclass(frozen=True)
class LocusRow:
    gain: float
    roots: np.ndarray
    max_real: float
    stable: bool


def root_locus(
    base_gains: PidGains,
    geom: FreeGeometry,
    params: LumpedParams,
    which: GainName,
    gain_grid: Sequence[float],
) -> list[LocusRow]:
    """Characteristic roots of the linearized loop along a gain sweep.

    ``base_gains`` are equation-frame gains; the swept gain replaces the
    matching entry row by row.
    """
    rows = []
    for g in gain_grid:
        coeffs = closed_loop_coefficients(_with_gain(base_gains, which, g),
                                          geom, params)
        roots, stable = characteristic_roots(coeffs)
        rows.append(LocusRow(gain=g, roots=roots,
                             max_real=float(roots.real.max()), stable=stable))
    return rows


def stability_boundary(
    base_gains: PidGains,
    geom: FreeGeometry,
    params: LumpedParams,
    which: GainName,
    gain_grid: Sequence[float],
    tol: float = 1e-9,
) -> float | None:
    """First gain in the sweep direction where max Re(root) crosses zero.

    Located by bisection between the bracketing grid points; None when the
    verdict never changes over the grid.
    """

    def max_real(g: float) -> float:
        coeffs = closed_loop_coefficients(_with_gain(base_gains, which, g),
                                          geom, params)
        roots, _ = characteristic_roots(coeffs)
        return float(roots.real.max())

    prev_g = gain_grid[0]
    prev_v = max_real(prev_g)
    for g in gain_grid[1:]:
        v = max_real(g)
        if (prev_v < 0) != (v < 0):
            lo, hi = prev_g, g
            while abs(hi - lo) > tol * max(1.0, abs(hi)):
                mid = 0.5 * (lo + hi)
                if (max_real(mid) < 0) == (prev_v < 0):
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        prev_g, prev_v = g, v
    return None


@dataclass(frozen=True)
class TrajectorySpec:
    """Cubic point-to-point rotation trajectory."""

    phi_0: float
    phi_f: float
    t_f: float

    def __post_init__(self):
        if not self.t_f > 0:
            raise ValueError("t_f must be positive")


def cubic_trajectory(spec: TrajectorySpec) -> Callable[[float], tuple[float, float]]:
    """phi(t) = phi_0 + 3 D (t/t_f)^2 - 2 D (t/t_f)^3 with D = phi_f - phi_0.

    Satisfies phi(0) = phi_0, phi(t_f) = phi_f, phi'(0) = phi'(t_f) = 0.
    """
    delta = spec.phi_f - spec.phi_0

    def sample(t: float) -> tuple[float, float]:
        if t < 0.0 or t > spec.t_f:
            raise TimeOutOfRange(f"t = {t:g} outside [0, {spec.t_f:g}]")
        u = t / spec.t_f
        phi = spec.phi_0 + delta * (3.0 * u**2 - 2.0 * u**3)
        phi_dot = delta * (6.0 * u - 6.0 * u**2) / spec.t_f
        return phi, phi_dot

    return sample


@dataclass(frozen=True)
class ReferenceSignal:
    """Piecewise reference for the rotation angle theta (rad).

    ``segments`` is a sequence of (duration, target) pairs. ``kind`` "step"
    holds each target constant; "trajectory" chains cubic segments that start
    from the previous target with zero end velocities (C1 across joints).
    """

    kind: Literal["step", "trajectory"]
    segments: tuple[tuple[float, float], ...]
    start: float = 0.0

    def __post_init__(self):
        if self.kind not in ("step", "trajectory"):
            raise ValueError("kind must be 'step' or 'trajectory'")
        if not self.segments:
            raise ValueError("at least one segment required")
        for duration, _ in self.segments:
            if not duration > 0:
                raise ValueError("segment durations must be positive")

    def duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def sample(self, t: float) -> tuple[float, float]:
        """(theta_d, theta_d_dot) at time t; holds the last target beyond."""
        t_seg = t
        prev = self.start
        for duration, target in self.segments:
            if t_seg < duration or (duration, target) == self.segments[-1]:
                if self.kind == "step":
                    return target, 0.0
                t_in = min(t_seg, duration)
                traj = cubic_trajectory(
                    TrajectorySpec(phi_0=prev, phi_f=target, t_f=duration)
                )
                return traj(t_in)
            t_seg -= duration
            prev = target
        return self.segments[-1][1], 0.0


@dataclass(frozen=True)
class ClosedLoopResult:
    """Closed-loop run sampled at the controller rate.

    ``theta`` is the unwinding-positive rotation (-handedness * phi).
    """

    t: np.ndarray
    theta_d: np.ndarray
    theta: np.ndarray
    s: np.ndarray
    pressure: np.ndarray


def closed_loop_sim(
    plant: Literal["nonlinear", "linearized"],
    gains: PidGains,
    reference: ReferenceSignal,
    control_rate: float,
    t_end: float,
    geom: FreeGeometry,
    params: LumpedParams,
    dt: float = 1e-4,
    bounds: tuple[float, float] = (0.0, psi_to_pa(10.0)),
    load: LoadCondition = NO_LOAD,
    initial: DynamicState = DynamicState(),
) -> ClosedLoopResult:
    """Discrete PID loop at ``control_rate`` with zero-order-held pressure.

    ``gains`` are in the unwinding-positive frame (positive gains stabilize).
    The plant is integrated with fixed RK4 substeps of size <= dt between
    controller updates. The integral state freezes while the unclamped
    command is outside the bounds.
    """
    if control_rate <= 0:
        raise ValueError("control_rate must be positive")
    rhs: RhsFn = eom_rhs if plant == "nonlinear" else linearized_rhs
    period = 1.0 / control_rate
    n_sub = max(1, int(round(period / dt)))
    dt_sub = period / n_sub
    n_ctrl = int(round(t_end * control_rate))
    h = geom.handedness

    t_out = np.arange(n_ctrl + 1) * period
    theta_d_out = np.empty(n_ctrl + 1)
    theta_out = np.empty(n_ctrl + 1)
    s_out = np.empty(n_ctrl + 1)
    p_out = np.empty(n_ctrl + 1)

    y = initial.as_array()
    integral = 0.0
    for k in range(n_ctrl + 1):
        tk = t_out[k]
        theta = -h * y[2]
        theta_dot = -h * y[3]
        theta_d, _ = reference.sample(tk)
        err = theta_d - theta
        raw = pid_pressure_unclamped(theta_d, theta, theta_dot, integral, gains)
        p_cmd = min(max(raw, bounds[0]), bounds[1])

        theta_d_out[k] = theta_d
        theta_out[k] = theta
        s_out[k] = y[0]
        p_out[k] = p_cmd

        if k == n_ctrl:
            break
        if bounds[0] <= raw <= bounds[1]:
            integral += err * period
        for i in range(n_sub):
            y = rk4_step(rhs, y, tk + i * dt_sub, dt_sub,
                         lambda t: p_cmd, geom, params, load)
            if not np.all(np.isfinite(y)):
                raise StepFailure(
                    f"closed-loop state non-finite at t={tk + (i + 1) * dt_sub:g}",
                    t=tk + (i + 1) * dt_sub,
                )
    return ClosedLoopResult(
        t=t_out, theta_d=theta_d_out, theta=theta_out, s=s_out, pressure=p_out
    )


def rmsd(series_a: np.ndarray, series_b: np.ndarray) -> float:
    """Root-mean-square deviation between two equally sampled series."""
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("series must share one time grid")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _torsional_zoh(geom: FreeGeometry, params: LumpedParams, period: float):
    """Exact ZOH discretization of the linearized torsional plant.

    State [theta, theta_dot], input P; the pressure-to-moment gain in the
    unwinding-positive frame is +2 pi R^3 cot Gamma.
    """
    g = 2.0 * math.pi * geom.R**3 / math.tan(geom.Gamma)
    a = np.array(
        [[0.0, 1.0], [-params.k_t / params.I_l, -params.c_t / params.I_l]]
    )
    b = np.array([[0.0], [g / params.I_l]])
    m = np.zeros((3, 3))
    m[:2, :2] = a * period
    m[:2, 2:] = b * period
    em = expm(m)
    return em[:2, :2], em[:2, 2:]


def _spectral_radius_pid(ad, bd, gains: PidGains, period: float) -> float:
    """Spectral radius of the discrete loop with states [theta, theta', I]."""
    k_row = np.array([gains.K_p, gains.K_d])
    if gains.K_i == 0.0:
        # integrator state is decoupled; leave its unit eigenvalue out
        return float(
            np.max(np.abs(np.linalg.eigvals(ad - bd @ k_row[None, :])))
        )
    a_cl = np.zeros((3, 3))
    a_cl[:2, :2] = ad - bd @ k_row[None, :]
    a_cl[:2, 2] = (bd * gains.K_i).ravel()
    a_cl[2, 0] = -period
    a_cl[2, 2] = 1.0
    return float(np.max(np.abs(np.linalg.eigvals(a_cl))))


def _dominant_damping(ad, bd, gains: PidGains, period: float) -> float:
    """Equivalent damping ratio of the slowest discrete pole (pair)."""
    k_row = np.array([gains.K_p, gains.K_d])
    a_cl = ad - bd @ k_row[None, :]
    z = np.linalg.eigvals(a_cl)
    lam = np.log(z.astype(complex)) / period
    dom = lam[np.argmax(lam.real)]
    mag = abs(dom)
    if mag == 0.0:
        return 1.0
    return float(min(1.0, -dom.real / mag))


def auto_tune(
    geom: FreeGeometry,
    params: LumpedParams,
    control_rate: float = 100.0,
    settle_time: float = 0.5,
    settle_tol: float = 1e-3,
) -> PidGains:
    """Procedural default gains for the discrete rotation loop.

    1. K_p: half of the sampled-data stability boundary with K_i = K_d = 0
       (the continuous loop has no proportional boundary; the limit comes
       entirely from the zero-order hold, so the boundary is found on the
       exact ZOH discretization by bisection on the spectral radius).
    2. K_d: brings the dominant pole pair to a damping ratio of about 0.7.
    3. K_i: smallest value (log grid, then bisection) whose linear discrete
       step response holds |error| < settle_tol of the step beyond
       settle_time, with a spectral-radius margin.

    Returned gains are in the unwinding-positive frame (all >= 0).
    """
    period = 1.0 / control_rate
    ad, bd = _torsional_zoh(geom, params, period)

    def rho_p(kp: float) -> float:
        return _spectral_radius_pid(ad, bd, PidGains(K_p=kp), period)

    hi = 1.0
    while rho_p(hi) < 1.0 and hi < 1e15:
        hi *= 2.0
    lo = 0.0 if hi == 1.0 else hi / 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if rho_p(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    k_p = 0.5 * lo

    # K_d sweep: damping ratio of the dominant pair closest to 0.7.
    best_kd, best_err = 0.0, float("inf")
    kd_max = k_p  # Pa*s/rad; time scales here are well under a second
    for i in range(200):
        kd = kd_max * i / 199
        g = PidGains(K_p=k_p, K_d=kd)
        if _spectral_radius_pid(ad, bd, g, period) >= 1.0:
            continue
        err = abs(_dominant_damping(ad, bd, g, period) - 0.7)
        if err < best_err:
            best_kd, best_err = kd, err
    k_d = best_kd

    def settles(ki: float) -> bool:
        g = PidGains(K_p=k_p, K_i=ki, K_d=k_d)
        if _spectral_radius_pid(ad, bd, g, period) >= 0.999:
            return False
        x = np.zeros(2)
        integral = 0.0
        n = int(round(3.0 * settle_time / period))
        ok = True
        for k in range(n):
            t = k * period
            err = 1.0 - x[0]
            if t >= settle_time and abs(err) > settle_tol:
                ok = False
                break
            u = k_p * err - k_d * x[1] + ki * integral
            integral += err * period
            x = ad @ x + (bd * u).ravel()
        return ok

    ki_lo, ki_hi = 0.0, 1.0
    while not settles(ki_hi):
        ki_hi *= 2.0
        if ki_hi > 1e15:
            raise RuntimeError("integral gain search failed to settle")
    for _ in range(60):
        mid = 0.5 * (ki_lo + ki_hi)
        if settles(mid):
            ki_hi = mid
        else:
            ki_lo = mid
    return PidGains(K_p=k_p, K_i=ki_hi, K_d=k_d)
