"""Constitutive models for the elastomer and fibers, plus calibration.

Hyperelastic models are incompressible; uniaxial stress expressions are the
analytic reductions of the strain-energy densities under lambda1 = lambda,
lambda2 = lambda3 = lambda**-0.5.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    InsufficientData,
    NoMinimumInInterval,
    NonPositiveStretch,
    OutOfRangeHardness,
)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OgdenParams:
    """First-order Ogden parameters: shear modulus mu (Pa), exponent alpha."""

    mu: float
    alpha: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")


@dataclass(frozen=True)
class NeoHookeanParams:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class LinearParams:
    E: float

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("E must be positive")


@dataclass(frozen=True)
class FiberParams:
    """Fiber structural stiffness EA in N per unit strain."""

    EA: float

    def __post_init__(self):
        if not self.EA > 0:
            raise ValueError("EA must be positive")


@dataclass(frozen=True)
class StressStrainSample:
    """One (stretch, true stress) point from a uniaxial test."""

    stretch: float
    true_stress: float

    def __post_init__(self):
        if not self.stretch > 0:
            raise ValueError("stretch must be positive")


def _check_stretch(*stretches: float):
    for lam in stretches:
        if not lam > 0:
            raise NonPositiveStretch(f"stretch {lam:g} is not positive")


def ogden_energy(l1: float, l2: float, l3: float, p: OgdenParams) -> float:
    """Strain energy density (Pa) of the first-order Ogden model."""
    _check_stretch(l1, l2, l3)
    a = p.alpha
    return 2.0 * p.mu / a**2 * (l1**a + l2**a + l3**a - 3.0)


def ogden_uniaxial_stress(stretch: float, p: OgdenParams) -> float:
    """True uniaxial stress, incompressible: (2 mu / alpha)(l^a - l^(-a/2))."""
    _check_stretch(stretch)
    a = p.alpha
    return 2.0 * p.mu / a * (stretch**a - stretch ** (-a / 2.0))


def neo_hookean_uniaxial_stress(stretch: float, p: NeoHookeanParams) -> float:
    """True uniaxial stress, incompressible: mu (l^2 - 1/l)."""
    _check_stretch(stretch)
    return p.mu * (stretch**2 - 1.0 / stretch)


def linear_uniaxial_stress(strain: float, p: LinearParams) -> float:
    return p.E * strain


# Gent's indentation-hardness relation, S in Shore A and E in MPa:
#   E = 0.0981 (56 + 7.62336 S) / (0.137505 (254 - 2.54 S))
_GENT_A = 0.0981
_GENT_B = 7.62336
_GENT_C = 0.137505
_GENT_D = 2.54


def shore_to_modulus(shore: float) -> float:
    """Young's modulus (Pa) from Shore A hardness."""
    if not 0 < shore < 100:
        raise OutOfRangeHardness(f"Shore A hardness {shore:g} outside (0, 100)")
    e_mpa = _GENT_A * (56.0 + _GENT_B * shore) / (_GENT_C * (254.0 - _GENT_D * shore))
    return e_mpa * 1e6


def modulus_to_shore(E: float) -> float:
    """Shore A hardness from Young's modulus (Pa); inverse of shore_to_modulus."""
    if not E > 0:
        raise ValueError("E must be positive")
    e_mpa = E / 1e6
    # Linear in S: e (C (254 - D S)) = A (56 + B S)
    s = (254.0 * _GENT_C * e_mpa - 56.0 * _GENT_A) / (
        _GENT_A * _GENT_B + _GENT_C * _GENT_D * e_mpa
    )
    if not 0 < s < 100:
        raise OutOfRangeHardness(f"modulus {E:g} Pa maps outside the Shore A scale")
    return s


def shear_from_youngs(E: float, nu: float = 0.5) -> float:
    """Shear modulus mu = E / (2 (1 + nu))."""
    return E / (2.0 * (1.0 + nu))


def _golden_min(f, a: float, b: float, tol: float) -> float:
    """Golden-section minimum of a unimodal f on [a, b]."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_rmsd(samples: Sequence[StressStrainSample], p: OgdenParams) -> float:
    """Root-mean-square stress deviation of an Ogden model over samples."""
    sq = 0.0
    for smp in samples:
        d = ogden_uniaxial_stress(smp.stretch, p) - smp.true_stress
        sq += d * d
    return math.sqrt(sq / len(samples))


def fit_ogden(
    samples: Sequence[StressStrainSample],
    mu_fixed: float,
    alpha_range: tuple[float, float] = (0.1, 4.0),
    tol: float = 1e-6,
) -> tuple[OgdenParams, float]:
    """Fit the Ogden exponent alpha with mu held fixed.

    Coarse grid over alpha_range followed by golden-section refinement of the
    bracketing triple. Returns the fitted parameters and their RMSD.
    """
    tension = [s for s in samples if s.stretch > 1.0]
    if len(tension) < 3:
        raise InsufficientData("need at least 3 samples with stretch > 1")

    lo, hi = alpha_range

    def cost(alpha: float) -> float:
        return fit_rmsd(samples, OgdenParams(mu=mu_fixed, alpha=alpha))

    n_grid = 80
    alphas = [lo + (hi - lo) * i / (n_grid - 1) for i in range(n_grid)]
    costs = [cost(a) for a in alphas]
    i_min = costs.index(min(costs))
    if i_min == 0 or i_min == n_grid - 1:
        raise NoMinimumInInterval(
            f"residual minimum sits at the alpha search boundary ({alphas[i_min]:g})"
        )
    alpha = _golden_min(cost, alphas[i_min - 1], alphas[i_min + 1], tol)
    params = OgdenParams(mu=mu_fixed, alpha=alpha)
    return params, fit_rmsd(samples, params)


def fit_linear_modulus(
    samples: Sequence[tuple[float, float]], strain_cap: float
) -> float:
    """Least-squares through-origin slope of (strain, stress) pairs.

    Only samples with 0 < strain <= strain_cap enter the fit. Works equally
    for elastomer stress (Pa per strain) and fiber load (N per strain).
    """
    region = [(x, y) for x, y in samples if 0.0 < x <= strain_cap]
    if len(region) < 2:
        raise InsufficientData(
            f"fewer than 2 samples with strain in (0, {strain_cap:g}]"
        )
    sxy = sum(x * y for x, y in region)
    sxx = sum(x * x for x, y in region)
    return sxy / sxx


def parse_stress_strain(fh, engineering: bool = False) -> list[StressStrainSample]:
    """Read uniaxial samples from an open CSV stream.

    Header ``stretch,true_stress_pa`` is read directly. With
    ``engineering=True`` the header must be ``strain,eng_stress_pa`` and the
    data are converted assuming incompressibility (sigma_true = sigma_eng *
    lambda, lambda = 1 + strain).
    """
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    if engineering:
        if fields[:2] != ["strain", "eng_stress_pa"]:
            raise InsufficientData(
                f"expected header strain,eng_stress_pa, got {fields}"
            )
        out = []
        for row in reader:
            lam = 1.0 + float(row["strain"])
            out.append(
                StressStrainSample(
                    stretch=lam, true_stress=float(row["eng_stress_pa"]) * lam
                )
            )
        return out
    if fields[:2] != ["stretch", "true_stress_pa"]:
        raise InsufficientData(
            f"expected header stretch,true_stress_pa, got {fields}"
        )
    return [
        StressStrainSample(
            stretch=float(row["stretch"]),
            true_stress=float(row["true_stress_pa"]),
        )
        for row in reader
    ]


def read_stress_strain_csv(path, engineering: bool = False) -> list[StressStrainSample]:
    with open(path, newline="") as fh:
        return parse_stress_strain(fh, engineering=engineering)
