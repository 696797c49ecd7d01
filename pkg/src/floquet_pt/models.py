"""Hamiltonians and measurement protocols.

Basis ordering is ``(|0>, |1>)`` for the two-level system and
``(|0>, |1>, |P>)`` for the three-level one. Loss (measurement) always acts
on ``|1>``; ``|0>`` is the initial, measured-for-survival state.

Units: angular frequencies in rad/s, rates in 1/s, times in seconds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
# ratio Omega'/Omega and Gamma/Omega needed before adiabatic elimination is trusted
REDUCTION_RATIO_MIN = 10.0
STATIC_EP_TOL = 1e-12


class PhaseLabel(str, enum.Enum):
    PTSP = "PTSP"  # unbroken
    PTBP = "PTBP"  # broken
    EP = "EP"

    def __str__(self) -> str:
        return self.value


class EmptyProtocolError(ValueError):
    """A protocol ended up with no segments of positive duration."""


def mhz_to_rad_s(f_mhz: float) -> float:
    """Convert a frequency in MHz to an angular frequency, ``2 pi f``."""
    return TWO_PI * f_mhz * 1e6


def us_to_s(t_us: float) -> float:
    return t_us * 1e-6


def _coupling_hamiltonian(omega: float, gamma: float) -> np.ndarray:
    return np.array([[0.0, 0.5 * omega], [0.5 * omega, -1j * gamma]], dtype=complex)


@dataclass(frozen=True)
class ContinuousModel:
    """Continuously measured two-level system.

    ``H = -i gamma |1><1| + (omega/2)(|0><1| + |1><0|)``
    """

    omega: float
    gamma: float

    def __post_init__(self):
        if not (self.omega >= 0 and self.gamma >= 0):
            raise ValueError("omega and gamma must be non-negative")
        if not (math.isfinite(self.omega) and math.isfinite(self.gamma)):
            raise ValueError("omega and gamma must be finite")

    def hamiltonian(self) -> np.ndarray:
        return _coupling_hamiltonian(self.omega, self.gamma)

    def pt_hamiltonian(self) -> np.ndarray:
        """Balanced gain/loss form, ``H + (i gamma / 2) I``."""
        return self.hamiltonian() + 0.5j * self.gamma * np.eye(2)


@dataclass(frozen=True)
class PulseSegment:
    omega: float
    gamma: float
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")
        if not (self.omega >= 0 and self.gamma >= 0):
            raise ValueError("segment omega and gamma must be non-negative")
        if not all(math.isfinite(x) for x in (self.omega, self.gamma, self.duration)):
            raise ValueError("segment parameters must be finite")

    def hamiltonian(self) -> np.ndarray:
        return _coupling_hamiltonian(self.omega, self.gamma)


@dataclass(frozen=True)
class PulseProtocol:
    """One Floquet period made of piecewise-constant segments, applied in order."""

    segments: tuple[PulseSegment, ...]

    def __init__(self, segments: Iterable[PulseSegment]):
        segs = tuple(segments)
        if not segs:
            raise EmptyProtocolError("a protocol needs at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def period(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def total_loss(self) -> float:
        """Integrated loss per period, ``sum gamma_k * duration_k``."""
        return math.fsum(s.gamma * s.duration for s in self.segments)

    @property
    def total_rotation(self) -> float:
        """Accumulated Rabi angle per period, ``sum omega_k * duration_k``."""
        return math.fsum(s.omega * s.duration for s in self.segments)

    def boundaries(self) -> list[float]:
        """Segment start times within the period, plus the period itself."""
        out = [0.0]
        acc = []
        for s in self.segments:
            acc.append(s.duration)
            out.append(math.fsum(acc))
        return out


@dataclass(frozen=True)
class DimensionlessPoint:
    """Measurement interval ``omega_t0`` and measurement strength ``gamma_t1``."""

    omega_t0: float
    gamma_t1: float

    def __post_init__(self):
        if not (self.omega_t0 >= 0 and self.gamma_t1 >= 0):
            raise ValueError("omega_t0 and gamma_t1 must be non-negative")


@dataclass(frozen=True)
class ThreeLevelModel:
    """Two-level system whose ``|1>`` is coupled to a fast decaying level ``|P>``.

    ``Gamma`` is the population linewidth of ``|P>``, so the non-Hermitian
    term is ``-i (Gamma/2) |P><P|``. With that convention adiabatic
    elimination gives the two-level loss rate ``omega_prime**2 / (2 Gamma)``.
    """

    omega: float
    omega_prime: float
    Gamma: float

    def __post_init__(self):
        if not (self.omega >= 0 and self.omega_prime >= 0 and self.Gamma >= 0):
            raise ValueError("three-level parameters must be non-negative")

    def hamiltonian(self) -> np.ndarray:
        h = np.zeros((3, 3), dtype=complex)
        h[0, 1] = h[1, 0] = 0.5 * self.omega
        h[1, 2] = h[2, 1] = 0.5 * self.omega_prime
        h[2, 2] = -0.5j * self.Gamma
        return h

    @property
    def gamma_eff(self) -> float:
        if self.omega_prime == 0:
            return 0.0
        return self.omega_prime ** 2 / (2.0 * self.Gamma)

    def ratios(self) -> tuple[float, float]:
        """``(omega_prime/omega, Gamma/omega)``; infinite when omega is zero."""
        if self.omega == 0:
            return math.inf, math.inf
        return self.omega_prime / self.omega, self.Gamma / self.omega

    @property
    def reducible(self) -> bool:
        return all(r >= REDUCTION_RATIO_MIN for r in self.ratios())

    def reduced(self) -> ContinuousModel:
        return ContinuousModel(self.omega, self.gamma_eff)


def canonical_protocol(point: DimensionlessPoint, omega: float = 1.0, gamma: float = 1.0) -> PulseProtocol:
    """Evolve for ``t0 = omega_t0/omega``, then measure for ``t1 = gamma_t1/gamma``.

    A zero dimensionless value drops its segment entirely.
    """
    segments = []
    if point.omega_t0 > 0:
        if not omega > 0:
            raise ValueError("omega must be positive when omega_t0 > 0")
        segments.append(PulseSegment(omega, 0.0, point.omega_t0 / omega))
    if point.gamma_t1 > 0:
        if not gamma > 0:
            raise ValueError("gamma must be positive when gamma_t1 > 0")
        segments.append(PulseSegment(0.0, gamma, point.gamma_t1 / gamma))
    if not segments:
        raise EmptyProtocolError("omega_t0 and gamma_t1 are both zero")
    return PulseProtocol(segments)


def dimensionless_point(protocol: PulseProtocol) -> DimensionlessPoint:
    """Recover ``(omega_t0, gamma_t1)`` as the per-period rotation and loss."""
    return DimensionlessPoint(protocol.total_rotation, protocol.total_loss)


def square_wave_protocol(omega: float, gamma: float, freq: float) -> PulseProtocol:
    """Anti-phase square waves: coupling on for half a period, then loss.

    ``freq`` is the angular oscillation frequency; the period is ``2 pi / freq``.
    """
    if not freq > 0:
        raise ValueError("square-wave frequency must be positive")
    half = math.pi / freq
    return PulseProtocol([PulseSegment(omega, 0.0, half), PulseSegment(0.0, gamma, half)])


def pulsed_equivalent(model: ContinuousModel, period: float, duty: float = 0.5) -> PulseProtocol:
    """Canonical pulsed protocol whose period average reproduces ``model``.

    The coupling runs for ``duty * period`` and the loss for the rest, each
    scaled up so that ``omega_t0 = omega * period`` and ``gamma_t1 = gamma * period``.
    """
    if not period > 0:
        raise ValueError("period must be positive")
    if not 0 < duty < 1:
        raise ValueError("duty must lie strictly between 0 and 1")
    t0 = duty * period
    t1 = period - t0
    return PulseProtocol(
        [
            PulseSegment(model.omega * period / t0, 0.0, t0),
            PulseSegment(0.0, model.gamma * period / t1, t1),
        ]
    )


def static_classify(model: ContinuousModel, tol: float = STATIC_EP_TOL) -> PhaseLabel:
    if model.omega == 0:
        raise ValueError("gamma/omega is undefined for omega = 0")
    ratio = model.gamma / model.omega
    if abs(ratio - 1.0) <= tol:
        return PhaseLabel.EP
    return PhaseLabel.PTSP if ratio < 1.0 else PhaseLabel.PTBP


def protocol_from_segments(rows: Sequence[Sequence[float]]) -> PulseProtocol:
    """Build a protocol from ``(omega, gamma, duration)`` triples."""
    return PulseProtocol(PulseSegment(float(o), float(g), float(d)) for o, g, d in rows)
