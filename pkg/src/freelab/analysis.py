"""Side-by-side comparison of the nonlinear and linearized plant models.

The linearized model freezes the tube radius and fiber angle at their rest
values, so it is only trustworthy while the configuration stays close to
rest. These helpers quantify that drift for open-loop pressure runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DynamicState,
    LoadCondition,
    LumpedParams,
    NO_LOAD,
    PressureSignal,
    TimeSeries,
    eom_rhs,
    integrate,
    linearized_rhs,
    static_equilibrium,
)
from .kinematics import FreeGeometry, configuration


@dataclass(frozen=True)
class OpenLoopComparison:
    """Matched-grid open-loop responses of both plants.

    ``r_drift`` and ``gamma_drift`` are the per-sample relative change of
    the tube radius and fiber angle from rest, evaluated on the nonlinear
    trajectory (the linearized model assumes both are zero).
    """

    nonlinear: TimeSeries
    linearized: TimeSeries
    r_drift: np.ndarray
    gamma_drift: np.ndarray


def open_loop_comparison(
    geom: FreeGeometry,
    params: LumpedParams,
    pressure: PressureSignal,
    t_end: float,
    dt: float = 1e-4,
    load: LoadCondition = NO_LOAD,
    initial: DynamicState = DynamicState(),
) -> OpenLoopComparison:
    nl = integrate(eom_rhs, initial, pressure, t_end, dt, geom, params, load)
    lin = integrate(linearized_rhs, initial, pressure, t_end, dt, geom, params,
                    load)
    r_drift = np.empty(nl.t.size)
    gamma_drift = np.empty(nl.t.size)
    for i in range(nl.t.size):
        conf = configuration(geom, nl.states[i, 0], nl.states[i, 2])
        r_drift[i] = conf.r / geom.R - 1.0
        gamma_drift[i] = conf.gamma / geom.Gamma - 1.0
    return OpenLoopComparison(
        nonlinear=nl, linearized=lin, r_drift=r_drift, gamma_drift=gamma_drift
    )


def linearization_pressure_excess(
    P: float, geom: FreeGeometry, params: LumpedParams
) -> float:
    """Relative over-pressure the linearized model needs for the same twist.

    At pressure P the nonlinear plant settles at twist phi*. The linearized
    steady state reaches that twist at pressure k_t |phi*| / (2 pi R^3
    cot Gamma); the return value is that pressure over P, minus one.
    Positive values mean the linearized model over-estimates the pressure
    demand (it ignores the radius growth that amplifies the moment arm).
    """
    if P <= 0:
        raise ValueError("P must be positive")
    _, phi_star = static_equilibrium(P, geom, params)
    coef = 2.0 * math.pi * geom.R**3 / math.tan(geom.Gamma)
    p_lin = params.k_t * abs(phi_star) / coef
    return p_lin / P - 1.0
