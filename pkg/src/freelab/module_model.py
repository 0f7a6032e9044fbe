"""Reduced kinetostatic model of four FREEs on a rigid square end plate.

Each actuator's free length and twist come from its own static equilibrium;
the plate pose is recovered from a least-squares plane through the four
attachment points and the centerline is treated as a constant-curvature arc.
This is a declared surrogate: symmetry, sign, and topology of the workspace
are meaningful, millimeter magnitudes are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from . import dynamics
from .dynamics import LumpedParams, static_equilibrium
from .errors import NoConvergence
from .kinematics import FreeGeometry
from .units import psi_to_pa

#: Actuator azimuths on the plate (square corners), counterclockwise.
_AZIMUTHS = tuple(math.pi / 4.0 + i * math.pi / 2.0 for i in range(4))

#: Handedness pattern: like-handed units sit on the same diagonal.
_HANDEDNESS = (1, -1, 1, -1)


@dataclass(frozen=True)
class ModuleGeometry:
    """Four identical FREEs (alternating handedness) on a square plate."""

    actuator: FreeGeometry  # template; handedness applied per slot
    half_diagonal: float  # center-to-corner distance d, m
    params: LumpedParams

    def __post_init__(self):
        if not self.half_diagonal > 0:
            raise ValueError("half_diagonal must be positive")

    def actuator_geometry(self, index: int) -> FreeGeometry:
        a = self.actuator
        return FreeGeometry(
            L=a.L,
            inner_radius=a.inner_radius,
            wall=a.wall,
            Gamma=a.Gamma,
            handedness=_HANDEDNESS[index],
            n_fibers=a.n_fibers,
        )


@dataclass(frozen=True)
class ActuationPattern:
    """Which of the four actuators are pressurized, and at what pressure."""

    case_id: int
    variation: int
    flags: tuple[bool, bool, bool, bool]
    pressures: tuple[float, float, float, float]

    def with_pressure(self, P: float) -> "ActuationPattern":
        return ActuationPattern(
            case_id=self.case_id,
            variation=self.variation,
            flags=self.flags,
            pressures=tuple(P if f else 0.0 for f in self.flags),
        )

    def rotated(self, quarter_turns: int = 1) -> "ActuationPattern":
        """Pattern rotated by 90 deg steps about the module axis."""
        k = quarter_turns % 4
        flags = tuple(self.flags[(i - k) % 4] for i in range(4))
        pressures = tuple(self.pressures[(i - k) % 4] for i in range(4))
        return ActuationPattern(self.case_id, self.variation, flags, pressures)


_CASE_FLAGS: dict[int, list[tuple[bool, bool, bool, bool]]] = {
    1: [(True, True, True, True)],
    2: [(True, False, True, False), (False, True, False, True)],
    3: [
        (True, False, False, False),
        (False, True, False, False),
        (False, False, True, False),
        (False, False, False, True),
    ],
    4: [
        (True, True, False, False),
        (False, True, True, False),
        (False, False, True, True),
        (True, False, False, True),
    ],
    5: [
        (False, True, True, True),
        (True, False, True, True),
        (True, True, False, True),
        (True, True, True, False),
    ],
}


def enumerate_patterns(case_id: int, pressure: float = 0.0) -> list[ActuationPattern]:
    """Canonical variations of an actuation case (counts 1, 2, 4, 4, 4)."""
    if case_id not in _CASE_FLAGS:
        raise ValueError(f"case_id must be 1..5, got {case_id}")
    return [
        ActuationPattern(
            case_id=case_id,
            variation=v,
            flags=flags,
            pressures=tuple(pressure if f else 0.0 for f in flags),
        )
        for v, flags in enumerate(_CASE_FLAGS[case_id])
    ]


def all_patterns(pressure: float = 0.0) -> list[ActuationPattern]:
    out = []
    for case_id in sorted(_CASE_FLAGS):
        out.extend(enumerate_patterns(case_id, pressure))
    return out


@lru_cache(maxsize=4096)
def _cached_equilibrium(geom: FreeGeometry, params: LumpedParams, P: float):
    return static_equilibrium(P, geom, params)


def actuator_response(
    geom: FreeGeometry, params: LumpedParams, P: float
) -> tuple[float, float]:
    """Free length l and physical twist phi of one actuator at pressure P."""
    s_star, phi_star = _cached_equilibrium(geom, params, P)
    return geom.L + s_star, phi_star


@dataclass(frozen=True)
class EndEffectorPose:
    """Tip position relative to the unpressurized tip, plus twist."""

    x: float
    y: float
    z: float
    twist: float
    azimuth: float  # bending-plane azimuth, rad; 0 when there is no bend


def module_pose(module: ModuleGeometry, pattern: ActuationPattern) -> EndEffectorPose:
    """Constant-curvature rigid-plate pose under an actuation pattern."""
    lengths = []
    twists = []
    for i in range(4):
        geom_i = module.actuator_geometry(i)
        try:
            l_i, phi_i = actuator_response(geom_i, module.params,
                                           pattern.pressures[i])
        except NoConvergence as exc:
            raise NoConvergence(
                f"actuator {i} infeasible at P={pattern.pressures[i]:g} Pa: {exc}",
                best_residual=exc.best_residual,
            ) from exc
        lengths.append(l_i)
        twists.append(phi_i)

    d = module.half_diagonal
    # Least-squares plane z = a x + b y + c through the attachment points.
    # The corner coordinates are symmetric, so the normal equations decouple.
    sxx = 2.0 * d * d
    a = sum(d * math.cos(t) * l for t, l in zip(_AZIMUTHS, lengths)) / sxx
    b = sum(d * math.sin(t) * l for t, l in zip(_AZIMUTHS, lengths)) / sxx
    l_mean = sum(lengths) / 4.0

    tilt = math.atan(math.hypot(a, b))
    if math.hypot(a, b) < 1e-15:
        azimuth = 0.0
        z_tip = l_mean
        offset = 0.0
    else:
        # Plate tips down where a x + b y < 0; the arc bends that way.
        azimuth = math.atan2(-b, -a)
        z_tip = l_mean * math.sin(tilt) / tilt
        offset = l_mean * (1.0 - math.cos(tilt)) / tilt
    twist = sum(twists) / 4.0
    return EndEffectorPose(
        x=offset * math.cos(azimuth),
        y=offset * math.sin(azimuth),
        z=z_tip - module.actuator.L,
        twist=twist,
        azimuth=azimuth,
    )


@dataclass(frozen=True)
class WorkspacePoint:
    case_id: int
    variation: int
    pressure: float
    pose: EndEffectorPose
    status: str  # "ok" or the failure message


@dataclass(frozen=True)
class WorkspaceResult:
    points: list[WorkspacePoint]
    # polylines[(case, variation)] = indices into points, ordered by pressure
    polylines: dict[tuple[int, int], list[int]]
    # boundary rings per pressure: point indices ordered by azimuth
    # (cases 3-5); linear interpolation between consecutive ring points
    # estimates the workspace boundary
    boundary: dict[float, list[int]]


def workspace(
    module: ModuleGeometry,
    cases: Sequence[int] = (1, 2, 3, 4, 5),
    pressure_grid: Sequence[float] = None,
) -> WorkspaceResult:
    """End-effector point cloud and per-variation paths over a pressure grid."""
    if pressure_grid is None:
        pressure_grid = [psi_to_pa(7.0) * i / 14 for i in range(15)]
    points: list[WorkspacePoint] = []
    polylines: dict[tuple[int, int], list[int]] = {}
    for case_id in sorted(cases):
        for pattern in enumerate_patterns(case_id):
            key = (case_id, pattern.variation)
            polylines[key] = []
            for P in pressure_grid:
                try:
                    pose = module_pose(module, pattern.with_pressure(P))
                    status = "ok"
                except NoConvergence as exc:
                    pose = EndEffectorPose(
                        float("nan"), float("nan"), float("nan"),
                        float("nan"), float("nan"),
                    )
                    status = str(exc)
                idx = len(points)
                points.append(
                    WorkspacePoint(case_id, pattern.variation, P, pose, status)
                )
                if status == "ok":
                    polylines[key].append(idx)

    boundary: dict[float, list[int]] = {}
    ring_cases = [c for c in (3, 4, 5) if c in cases]
    if ring_cases:
        for P in pressure_grid:
            ring = [
                i
                for i, pt in enumerate(points)
                if pt.case_id in ring_cases and pt.pressure == P
                and pt.status == "ok"
                and math.hypot(pt.pose.x, pt.pose.y) > 0.0
            ]
            ring.sort(key=lambda i: math.atan2(points[i].pose.y, points[i].pose.x))
            if ring:
                boundary[P] = ring
    return WorkspaceResult(points=points, polylines=polylines, boundary=boundary)


def stir_pattern(
    module: ModuleGeometry,
    band: tuple[float, float] = (psi_to_pa(2.0), psi_to_pa(10.0)),
    period: float = 4.0,
) -> Callable[[float], ActuationPattern]:
    """Phase-staggered sinusoidal pressures for a stirring motion.

    At any instant one actuator sits at the band maximum, one at the minimum,
    and the remaining two at mid-band; the roles advance every quarter
    period, blending the single-actuator and adjacent-pair patterns.
    """
    lo, hi = band
    if not 0 <= lo < hi:
        raise ValueError("band must satisfy 0 <= lo < hi")
    mid = 0.5 * (lo + hi)
    amp = 0.5 * (hi - lo)

    def at(t: float) -> ActuationPattern:
        pressures = tuple(
            mid + amp * math.cos(2.0 * math.pi * t / period - i * math.pi / 2.0)
            for i in range(4)
        )
        return ActuationPattern(
            case_id=0,
            variation=0,
            flags=(True, True, True, True),
            pressures=pressures,
        )

    return at


def stir_path(
    module: ModuleGeometry,
    band: tuple[float, float] = (psi_to_pa(2.0), psi_to_pa(10.0)),
    period: float = 4.0,
    n_samples: int = 64,
) -> list[tuple[float, EndEffectorPose]]:
    """Tip poses over one stirring period (closed curve)."""
    at = stir_pattern(module, band, period)
    out = []
    for k in range(n_samples + 1):
        t = period * k / n_samples
        out.append((t, module_pose(module, at(t))))
    return out
