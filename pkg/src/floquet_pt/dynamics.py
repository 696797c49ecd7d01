"""Stroboscopic and continuous-time trajectories, decay rates, and the
three-level reduction check.

The survival probability is ``P0 = <0|rho_n|0> = |<0|psi_n>|^2``, i.e. the raw
(unnormalised) population of the initial state. Normalised populations divide
by the remaining norm ``<psi_n|psi_n>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import smallmat
from .floquet import floquet_spectrum, period_propagator
from .models import ContinuousModel, PhaseLabel, PulseProtocol, ThreeLevelModel, pulsed_equivalent

NORM_UNDERFLOW = 1e-300
FIT_FLOOR = 1e-12
MIN_FIT_SAMPLES = 8
DEFAULT_PERIOD_CAP = 200_000


class ReductionWarning(UserWarning):
    """Adiabatic elimination requested outside its validity range."""


def initial_state(amplitudes: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.size not in (2, 3):
        raise ValueError("initial state must have 2 or 3 amplitudes")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("initial state must have unit norm")
    return psi


GROUND = (1.0, 0.0)


@dataclass
class Trajectory:
    """Sampled populations.

    ``raw[k, j]`` is ``|<j|psi_k>|^2``; ``norm[k]`` is their sum. ``n`` is the
    period index for stroboscopic runs and the sample index for continuous ones.
    """

    n: np.ndarray
    t: np.ndarray
    raw: np.ndarray
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.n)

    @property
    def norm(self) -> np.ndarray:
        return self.raw.sum(axis=1)

    @property
    def normalized(self) -> np.ndarray:
        return self.raw / self.norm[:, None]

    @property
    def p0_raw(self) -> np.ndarray:
        return self.raw[:, 0]

    @property
    def p1_raw(self) -> np.ndarray:
        return self.raw[:, 1]

    @property
    def p0_norm(self) -> np.ndarray:
        return self.normalized[:, 0]

    @property
    def p1_norm(self) -> np.ndarray:
        return self.normalized[:, 1]


def _populations(states: np.ndarray) -> np.ndarray:
    return (states * states.conj()).real


def stroboscopic_run(protocol: PulseProtocol, psi0=GROUND, n_periods: int = 100) -> Trajectory:
    """Apply the one-period propagator ``n_periods`` times, sampling after each period.

    If the norm underflows below 1e-300 the run stops early and the
    trajectory is marked ``truncated``.
    """
    if n_periods < 0:
        raise ValueError("n_periods must be >= 0")
    psi = initial_state(psi0)
    if psi.size != 2:
        raise ValueError("stroboscopic runs need a two-level state")
    u = period_propagator(protocol)
    # plain complex arithmetic is much faster than numpy for 2-vectors
    u00, u01, u10, u11 = (complex(x) for x in u.ravel())
    a, b = complex(psi[0]), complex(psi[1])
    out = np.empty((n_periods + 1, 2))
    out[0] = abs(a) ** 2, abs(b) ** 2
    count = n_periods + 1
    truncated = False
    for k in range(1, n_periods + 1):
        a, b = u00 * a + u01 * b, u10 * a + u11 * b
        p0 = a.real * a.real + a.imag * a.imag
        p1 = b.real * b.real + b.imag * b.imag
        if p0 + p1 < NORM_UNDERFLOW:
            count = k
            truncated = True
            break
        out[k] = p0, p1
    n = np.arange(count)
    return Trajectory(n=n, t=n * protocol.period, raw=out[:count], truncated=truncated)


def _exact_samples(h: np.ndarray, psi: np.ndarray, times: np.ndarray, method: str | None = None) -> np.ndarray:
    # the 2x2 closed form is exact and cheaper than the series
    method = method or ("closed" if psi.size == 2 else "series")
    states = np.empty((len(times), psi.size), dtype=complex)
    for k, t in enumerate(times):
        states[k] = smallmat.expm(h, float(t), method=method) @ psi
    return states


def _time_grid(t_max: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    count = int(math.floor(t_max / dt * (1 + 1e-12))) + 1
    return np.arange(count) * dt


def continuous_run(model: ContinuousModel, psi0=GROUND, t_max: float = 1.0, dt: float = 0.01) -> Trajectory:
    """Sample ``exp(-i H t) psi0`` on ``t = k dt``, each sample from its own exponential."""
    psi = initial_state(psi0)
    times = _time_grid(t_max, dt)
    raw = _populations(_exact_samples(model.hamiltonian(), psi, times))
    return Trajectory(n=np.arange(len(times)), t=times, raw=raw)


def three_level_run(model: ThreeLevelModel, psi0=(1.0, 0.0, 0.0), t_max: float = 1.0, dt: float = 0.01) -> Trajectory:
    psi = initial_state(psi0)
    if psi.size != 3:
        raise ValueError("three-level runs need a three-level state")
    times = _time_grid(t_max, dt)
    raw = _populations(_exact_samples(model.hamiltonian(), psi, times))
    return Trajectory(n=np.arange(len(times)), t=times, raw=raw)


def resolved_run(protocol: PulseProtocol, psi0=GROUND, n_periods: int = 10, samples_per_period: int = 20) -> Trajectory:
    """Time-resolved run through a protocol, ``samples_per_period`` points per period.

    Samples sit at ``t = n T + j T / samples_per_period`` and are exact:
    each is the period propagator applied ``n`` times followed by the partial
    propagator up to the in-period offset. A final sample at ``n_periods * T``
    closes the run.
    """
    if n_periods < 0 or samples_per_period < 1:
        raise ValueError("need n_periods >= 0 and samples_per_period >= 1")
    psi = initial_state(psi0)
    period = protocol.period
    bounds = protocol.boundaries()
    offsets = [j * period / samples_per_period for j in range(samples_per_period)]
    partial = []
    for tau in offsets:
        v = smallmat.identity(2)
        for seg, start in zip(protocol.segments, bounds):
            if tau <= start:
                break
            v = smallmat.expm(seg.hamiltonian(), min(seg.duration, tau - start), method="closed") @ v
        partial.append(v)
    u = period_propagator(protocol)
    n_idx, times, states = [], [], []
    for n in range(n_periods):
        for tau, v in zip(offsets, partial):
            n_idx.append(n)
            times.append(n * period + tau)
            states.append(v @ psi)
        psi = u @ psi
    n_idx.append(n_periods)
    times.append(n_periods * period)
    states.append(psi)
    raw = _populations(np.array(states))
    return Trajectory(n=np.array(n_idx), t=np.array(times), raw=raw)


@dataclass(frozen=True)
class DecayEstimate:
    kappa_multiplier: float
    kappa_fit: float | None
    fit_window: tuple[int, int] | None
    residual: float | None
    phase: PhaseLabel


def effective_decay_rate(
    protocol: PulseProtocol,
    psi0=GROUND,
    n_cap: int = DEFAULT_PERIOD_CAP,
    window: tuple[float, float] = (0.5, 1.0),
) -> DecayEstimate:
    """Per-period decay rate of the survival probability.

    ``kappa_multiplier`` is ``-2 ln|eta_+|``. ``kappa_fit`` is the negative
    slope of a least-squares line through ``ln P0`` on the tail of a
    stroboscopic run, where the run length ``n_max`` is the last period with
    ``P0 >= 1e-12`` (capped at ``n_cap``) and the tail is ``window`` as
    fractions of ``n_max``. The fit is skipped for oscillating (PTSP) points
    and when fewer than 8 tail samples remain.
    """
    spec = floquet_spectrum(protocol)
    kappa = spec.kappa
    if spec.phase is PhaseLabel.PTSP:
        return DecayEstimate(kappa, None, None, None, spec.phase)
    if kappa > 0:
        n_run = min(n_cap, int(math.ceil(-math.log(FIT_FLOOR) / kappa * 1.5)) + 16)
    else:
        n_run = n_cap
    traj = stroboscopic_run(protocol, psi0, n_run)
    p0 = traj.p0_raw
    above = np.nonzero(p0 >= FIT_FLOOR)[0]
    n_max = int(above[-1]) if above.size else 0
    lo = int(math.floor(window[0] * n_max))
    hi = int(math.floor(window[1] * n_max))
    idx = np.arange(lo, hi + 1)
    idx = idx[p0[idx] > 0]
    if idx.size < MIN_FIT_SAMPLES:
        return DecayEstimate(kappa, None, None, None, spec.phase)
    y = np.log(p0[idx])
    slope, intercept = np.polyfit(idx.astype(float), y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * idx + intercept)) ** 2)))
    return DecayEstimate(kappa, float(-slope), (lo, hi), resid, spec.phase)


def rabi_period(model: ContinuousModel) -> float:
    """Oscillation period ``2 pi / sqrt(omega^2 - gamma^2)`` of the populations.

    Outside the unbroken phase there is no oscillation; the bare ``2 pi / omega``
    is returned instead.
    """
    if model.omega <= 0:
        raise ValueError("rabi period needs omega > 0")
    if model.gamma < model.omega:
        return 2.0 * math.pi / math.sqrt(model.omega ** 2 - model.gamma ** 2)
    return 2.0 * math.pi / model.omega


@dataclass(frozen=True)
class ReductionReport:
    sup_error: float
    gamma_eff: float
    ratios: tuple[float, float]
    valid: bool


def validate_reduction(model: ThreeLevelModel, t_max: float | None = None, n_samples: int = 2001) -> ReductionReport:
    """Compare ``P0`` of the three-level model with its eliminated two-level form.

    ``t_max`` defaults to one bare Rabi period ``2 pi / omega``.
    """
    if not model.reducible:
        warnings.warn(
            f"reduction ratios {model.ratios()} below {10.0}; elimination may be inaccurate",
            ReductionWarning,
            stacklevel=2,
        )
    if t_max is None:
        if model.omega <= 0:
            raise ValueError("t_max is required when omega = 0")
        t_max = 2.0 * math.pi / model.omega
    times = np.linspace(0.0, t_max, n_samples)
    psi3 = np.array([1.0, 0.0, 0.0], dtype=complex)
    psi2 = np.array([1.0, 0.0], dtype=complex)
    full = _populations(_exact_samples(model.hamiltonian(), psi3, times))[:, 0]
    reduced = _populations(_exact_samples(model.reduced().hamiltonian(), psi2, times))[:, 0]
    return ReductionReport(
        sup_error=float(np.max(np.abs(full - reduced))),
        gamma_eff=model.gamma_eff,
        ratios=model.ratios(),
        valid=model.reducible,
    )


def trotter_errors(model: ContinuousModel, base_period: float, levels: int = 4, t_span: float | None = None) -> list[float]:
    """Sup error of pulsed vs continuous ``P0`` as the pulse period is halved.

    Level ``k`` uses period ``base_period / 2**k`` via :func:`pulsed_equivalent`
    and compares at the stroboscopic times inside ``[0, t_span]``
    (default: one Rabi period).
    """
    if t_span is None:
        t_span = rabi_period(model)
    h = model.hamiltonian()
    psi = np.array([1.0, 0.0], dtype=complex)
    errors = []
    for k in range(levels):
        period = base_period / 2 ** k
        n = int(math.floor(t_span / period * (1 + 1e-12)))
        pulsed = stroboscopic_run(pulsed_equivalent(model, period), GROUND, n)
        exact = _populations(_exact_samples(h, psi, pulsed.t, method="closed"))[:, 0]
        errors.append(float(np.max(np.abs(pulsed.p0_raw - exact))))
    return errors


def has_interior_minimum(values: Sequence[float], tol: float = 0.0) -> bool:
    """True if the sequence falls by more than ``tol`` and later rises by more than ``tol``.

    Equivalently some sample lies strictly below an earlier and a later one.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return False
    before = np.maximum.accumulate(v)[:-2]
    after = np.maximum.accumulate(v[::-1])[::-1][2:]
    mid = v[1:-1]
    return bool(np.any((mid + tol < before) & (mid + tol < after)))


def monotone_after(values: Sequence[float], start: int, increasing: bool = False, tol: float = 0.0) -> bool:
    """True if ``values[start:]`` never moves against the given direction by more than ``tol``."""
    d = np.diff(np.asarray(values, dtype=float)[start:])
    return bool(np.all(d >= -tol) if increasing else np.all(d <= tol))
