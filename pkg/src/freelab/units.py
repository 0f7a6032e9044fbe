"""Unit conversion constants and helpers.

Internally everything is SI (m, s, kg, Pa, rad). Pounds-per-square-inch and
degrees are accepted at the boundaries only.
"""

import math

# Exact conversion constant used everywhere psi appears.
PA_PER_PSI = 6894.757


def psi_to_pa(p_psi: float) -> float:
    return p_psi * PA_PER_PSI


def pa_to_psi(p_pa: float) -> float:
    return p_pa / PA_PER_PSI


def deg_to_rad(a_deg: float) -> float:
    return math.radians(a_deg)


def rad_to_deg(a_rad: float) -> float:
    return math.degrees(a_rad)
