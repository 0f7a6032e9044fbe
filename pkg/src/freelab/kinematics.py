"""Helical inextensible-fiber geometry of a FREE.

A FREE is a thin latex tube wound with inextensible fibers at winding angle
Gamma (measured from the tube axis). The fibers fix a total fiber length b and
couple the free-end axial displacement s and rotation phi to the current
radius r, winding angle gamma, and length l.

Sign convention: ``phi`` is the physical end rotation, whose sign follows the
winding handedness: positive phi tightens the winding of a handedness +1 (R)
actuator and loosens a handedness -1 (L) one. The handedness-aligned rotation
``handedness * phi`` is what enters the wrap angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateAngle, InfeasibleExtension, UnwoundSingularity


@dataclass(frozen=True)
class FreeGeometry:
    """Undeformed FREE geometry. Lengths in meters, angles in radians."""

    L: float  # initial length
    inner_radius: float
    wall: float
    Gamma: float  # initial winding angle, 0 < Gamma < pi/2
    handedness: int = 1  # +1 counterclockwise (R), -1 clockwise (L)
    n_fibers: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not (self.inner_radius > 0 and self.wall > 0):
            raise ValueError("inner_radius and wall must be positive")
        if not 0 < self.Gamma < math.pi / 2:
            raise DegenerateAngle("Gamma must lie in (0, pi/2)")
        if self.handedness not in (-1, 1):
            raise ValueError("handedness must be +1 or -1")
        if self.n_fibers < 1:
            raise ValueError("n_fibers must be >= 1")

    @property
    def R(self) -> float:
        """Initial fiber-layer (outer) radius."""
        return self.inner_radius + self.wall


#: Canonical geometry used throughout: 175 mm long, 9.52 mm inner diameter,
#: 0.8 mm wall, six fibers. Winding angle is supplied by the caller.
def canonical_geometry(Gamma: float, handedness: int = 1) -> FreeGeometry:
    return FreeGeometry(
        L=0.175,
        inner_radius=0.00952 / 2,
        wall=0.0008,
        Gamma=Gamma,
        handedness=handedness,
        n_fibers=6,
    )


@dataclass(frozen=True)
class FreeConfiguration:
    """Deformed state of a FREE at end displacement s and rotation phi."""

    s: float
    phi: float
    l: float
    r: float
    gamma: float
    psi: float  # current total wrap angle


def wrap_angle(geom: FreeGeometry) -> float:
    """Total initial wrap angle Theta = L * tan(Gamma) / R of one fiber."""
    return geom.L * math.tan(geom.Gamma) / geom.R


def fiber_length(geom: FreeGeometry) -> float:
    """Fixed fiber length b = L / cos(Gamma)."""
    return geom.L / math.cos(geom.Gamma)


def configuration(geom: FreeGeometry, s: float, phi: float) -> FreeConfiguration:
    """Deformed configuration at free-end displacement s and rotation phi.

    Raises InfeasibleExtension when the fiber would have to stretch
    (l >= b) and UnwoundSingularity when the helix is fully unwound
    (psi <= 0).
    """
    b = fiber_length(geom)
    theta = wrap_angle(geom)
    l = geom.L + s
    if l >= b:
        raise InfeasibleExtension(
            f"extension s={s:g} m reaches the taut-fiber limit (l >= b = {b:g} m)"
        )
    if l <= 0:
        raise InfeasibleExtension(f"extension s={s:g} m collapses the tube (l <= 0)")
    psi = theta + geom.handedness * phi
    if psi <= 0:
        raise UnwoundSingularity(
            f"rotation phi={phi:g} rad unwinds the helix (psi = {psi:g} <= 0)"
        )
    r = math.sqrt(b * b - l * l) / psi
    gamma = math.atan2(r * psi, l)
    return FreeConfiguration(s=s, phi=phi, l=l, r=r, gamma=gamma, psi=psi)


def max_extension(geom: FreeGeometry) -> float:
    """Largest feasible s (exclusive bound): fiber taut at s = b - L."""
    return fiber_length(geom) - geom.L
