"""Parameter-grid evaluation: phase diagrams, EP boundary curves, decay maps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .floquet import DEFAULT_TOL, OutOfDomainError, discriminant, ep_boundary, kappa_multiplier, label_from_discriminant
from .models import DimensionlessPoint, PhaseLabel

BOUNDARY_TOL = 1e-9
THREADS_ENV = "FPT_THREADS"

_PHASE_CODES = {PhaseLabel.PTSP: 0, PhaseLabel.PTBP: 1, PhaseLabel.EP: 2}
PHASES_BY_CODE = {v: k for k, v in _PHASE_CODES.items()}


@dataclass(frozen=True)
class Axis:
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("an axis needs at least 2 points")
        if not self.min < self.max:
            raise ValueError("axis min must be below max")


@dataclass(frozen=True)
class GridSpec:
    omega_t0: Axis
    gamma_t1: Axis
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ValueError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and (self.omega_t0.min <= 0 or self.gamma_t1.min <= 0):
            raise ValueError("log spacing needs positive axis minima")

    def values(self, axis: Axis) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(axis.min, axis.max, axis.count)
        return np.linspace(axis.min, axis.max, axis.count)

    @property
    def omega_t0_values(self) -> np.ndarray:
        return self.values(self.omega_t0)

    @property
    def gamma_t1_values(self) -> np.ndarray:
        return self.values(self.gamma_t1)


DEFAULT_GRID = GridSpec(Axis(0.0, math.pi, 256), Axis(0.0, 2.0, 256))


@dataclass
class PhaseDiagram:
    """Grid results; arrays are indexed ``[i_omega_t0, j_gamma_t1]`` (row-major)."""

    spec: GridSpec
    omega_t0: np.ndarray
    gamma_t1: np.ndarray
    discriminant: np.ndarray
    phase_code: np.ndarray
    kappa: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.discriminant.shape

    def phase(self, i: int, j: int) -> PhaseLabel:
        return PHASES_BY_CODE[int(self.phase_code[i, j])]

    def cells(self) -> Iterable[tuple[float, float, float, PhaseLabel, float]]:
        """Yield ``(omega_t0, gamma_t1, D, phase, kappa)`` in row-major order."""
        for i, a in enumerate(self.omega_t0):
            for j, g in enumerate(self.gamma_t1):
                yield float(a), float(g), float(self.discriminant[i, j]), self.phase(i, j), float(self.kappa[i, j])


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fill_row(i: int, a: float, gammas: np.ndarray, tol: float, with_kappa: bool, d_out, code_out, kappa_out) -> None:
    for j, g in enumerate(gammas):
        point = DimensionlessPoint(a, float(g))
        d = discriminant(point)
        d_out[i, j] = d
        code_out[i, j] = _PHASE_CODES[label_from_discriminant(d, tol)]
        if with_kappa:
            kappa_out[i, j] = kappa_multiplier(point)


def _evaluate(spec: GridSpec, workers: int | None, tol: float, with_kappa: bool) -> PhaseDiagram:
    omegas = spec.omega_t0_values
    gammas = spec.gamma_t1_values
    shape = (len(omegas), len(gammas))
    d = np.empty(shape)
    code = np.empty(shape, dtype=np.int8)
    kappa = np.full(shape, np.nan)
    workers = workers or default_workers()
    # each task owns one row of the preallocated buffers
    if workers == 1:
        for i, a in enumerate(omegas):
            _fill_row(i, float(a), gammas, tol, with_kappa, d, code, kappa)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_fill_row, i, float(a), gammas, tol, with_kappa, d, code, kappa)
                for i, a in enumerate(omegas)
            ]
            for f in futures:
                f.result()
    return PhaseDiagram(spec, omegas, gammas, d, code, kappa)


def phase_diagram(spec: GridSpec = DEFAULT_GRID, workers: int | None = None, tol: float = DEFAULT_TOL) -> PhaseDiagram:
    """Discriminant, phase label and dominant decay rate on every grid node."""
    return _evaluate(spec, workers, tol, with_kappa=True)


def decay_map(spec: GridSpec = DEFAULT_GRID, workers: int | None = None, tol: float = DEFAULT_TOL) -> PhaseDiagram:
    """Same grid evaluation as :func:`phase_diagram`, used for the kappa channel."""
    return _evaluate(spec, workers, tol, with_kappa=True)


@dataclass
class BoundaryCurve:
    points: list[tuple[float, float]]
    skipped: list[float]


def boundary_curve(omega_t0_samples: Iterable[float]) -> BoundaryCurve:
    """EP curve ``(omega_t0, gamma_t1*)``; samples outside ``(0, pi)`` are skipped."""
    points, skipped = [], []
    for a in omega_t0_samples:
        a = float(a)
        try:
            points.append((a, ep_boundary(a)))
        except OutOfDomainError:
            skipped.append(a)
    return BoundaryCurve(points, skipped)
