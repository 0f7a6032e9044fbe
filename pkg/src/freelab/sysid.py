"""Identification of lumped parameters from experimental records.

Stiffness comes from static load-displacement sweeps (least squares through
the origin); damping from free-vibration traces via the logarithmic
decrement.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InsufficientData,
    InsufficientPeaks,
    NotUnderdamped,
    ZeroDisplacementRange,
)


@dataclass(frozen=True)
class StaticLoadSample:
    """Applied load (N or N*m) and measured displacement (m or rad)."""

    load: float
    displacement: float
    axis: str = "axial"  # "axial" or "torsional"


@dataclass(frozen=True)
class VibrationTrace:
    """Uniformly sampled free-vibration displacement record."""

    t: np.ndarray
    displacement: np.ndarray
    axis: str = "axial"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.size != np.asarray(self.displacement).size:
            raise ValueError("t and displacement must have equal length")
        if t.size >= 3:
            steps = np.diff(t)
            if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
                raise ValueError("sample period must be constant")


@dataclass(frozen=True)
class StiffnessFit:
    k: float
    residual_rms: float


def fit_stiffness(samples: Sequence[StaticLoadSample]) -> StiffnessFit:
    """Least-squares through-origin slope load = k * displacement."""
    if len(samples) < 2:
        raise InsufficientData("need at least 2 load-displacement samples")
    x = np.array([s.displacement for s in samples])
    y = np.array([s.load for s in samples])
    sxx = float(x @ x)
    if sxx == 0.0:
        raise ZeroDisplacementRange("all displacements are zero")
    k = float(x @ y) / sxx
    residual = y - k * x
    return StiffnessFit(k=k, residual_rms=float(np.sqrt(np.mean(residual**2))))


@dataclass(frozen=True)
class DampingFit:
    c: float
    zeta: float
    decrement: float
    n_peaks: int


def _find_peaks(x: np.ndarray, floor: float) -> list[int]:
    """Indices of strict local maxima above the floor."""
    idx = []
    for i in range(1, len(x) - 1):
        if x[i] > x[i - 1] and x[i] > x[i + 1] and x[i] > floor:
            idx.append(i)
    return idx


def fit_damping(
    trace: VibrationTrace,
    k: float,
    inertia: float,
    noise_floor_frac: float = 0.01,
) -> DampingFit:
    """Damping constant from the averaged logarithmic decrement.

    delta = mean ln(peak_i / peak_{i+1}) over consecutive positive peaks,
    zeta = delta / sqrt(4 pi^2 + delta^2), c = 2 zeta sqrt(k * inertia).
    """
    x = np.asarray(trace.displacement, dtype=float)
    if x.size < 3:
        raise InsufficientData("trace too short")
    if not np.any(np.signbit(x) != np.signbit(x[0])):
        raise NotUnderdamped("trace never crosses zero; no oscillation")
    first_peak = float(np.max(np.abs(x)))
    peaks = _find_peaks(x, noise_floor_frac * first_peak)
    if len(peaks) < 2:
        raise InsufficientPeaks(
            f"found {len(peaks)} usable peak(s); need at least 2"
        )
    decs = [
        math.log(x[peaks[i]] / x[peaks[i + 1]]) for i in range(len(peaks) - 1)
    ]
    delta = sum(decs) / len(decs)
    zeta = delta / math.sqrt(4.0 * math.pi**2 + delta**2)
    c = 2.0 * zeta * math.sqrt(k * inertia)
    return DampingFit(c=c, zeta=zeta, decrement=delta, n_peaks=len(peaks))


def parse_load_displacement(fh, axis: str) -> list[StaticLoadSample]:
    """CSV stream with header ``load,displacement``."""
    reader = csv.DictReader(fh)
    if (reader.fieldnames or [])[:2] != ["load", "displacement"]:
        raise InsufficientData(
            f"expected header load,displacement, got {reader.fieldnames}"
        )
    return [
        StaticLoadSample(
            load=float(row["load"]),
            displacement=float(row["displacement"]),
            axis=axis,
        )
        for row in reader
    ]


def read_load_displacement_csv(path, axis: str) -> list[StaticLoadSample]:
    with open(path, newline="") as fh:
        return parse_load_displacement(fh, axis)


def parse_vibration(fh, axis: str) -> VibrationTrace:
    """CSV stream with header ``t,displacement``."""
    reader = csv.DictReader(fh)
    if (reader.fieldnames or [])[:2] != ["t", "displacement"]:
        raise InsufficientData(
            f"expected header t,displacement, got {reader.fieldnames}"
        )
    t, x = [], []
    for row in reader:
        t.append(float(row["t"]))
        x.append(float(row["displacement"]))
    return VibrationTrace(t=np.array(t), displacement=np.array(x), axis=axis)


def read_vibration_csv(path, axis: str) -> VibrationTrace:
    with open(path, newline="") as fh:
        return parse_vibration(fh, axis)
