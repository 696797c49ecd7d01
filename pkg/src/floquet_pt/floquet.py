"""One-period propagators, Floquet multipliers and PT-phase classification."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import smallmat
from .models import DimensionlessPoint, PhaseLabel, PulseProtocol

DEFAULT_TOL = 1e-12
# relative modulus tolerance for "equal moduli" (PTSP) in floquet_spectrum
MODULUS_TOL = 1e-10
_LOG_SPACE_THRESHOLD = 700.0


class OutOfDomainError(ValueError):
    pass


def period_propagator(protocol: PulseProtocol) -> np.ndarray:
    """``U(T, 0)``: segment propagators multiplied right to left in time order."""
    u = smallmat.identity(2)
    for seg in protocol.segments:
        u = smallmat.expm(seg.hamiltonian(), seg.duration) @ u
    return u


def canonical_propagator(point: DimensionlessPoint) -> np.ndarray:
    """Closed-form ``U(T, 0)`` for the evolve-then-measure protocol.

    In the ``(|0>, |1>)`` basis the loss factor sits on the ``|1>`` row.
    """
    c = math.cos(0.5 * point.omega_t0)
    s = math.sin(0.5 * point.omega_t0)
    e = math.exp(-point.gamma_t1)
    return np.array([[c, -1j * s], [-1j * e * s, e * c]], dtype=complex)


def _lncosh(x: float) -> float:
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


def discriminant(point: DimensionlessPoint) -> float:
    """``cos^2(omega_t0/2) cosh^2(gamma_t1/2)``.

    Above 1 the symmetry is broken, below 1 it is intact. Large measurement
    strengths are handled in log space.
    """
    c = math.cos(0.5 * point.omega_t0)
    if point.gamma_t1 <= _LOG_SPACE_THRESHOLD:
        return c * c * math.cosh(0.5 * point.gamma_t1) ** 2
    if c == 0.0:
        return 0.0
    log_d = 2.0 * math.log(abs(c)) + 2.0 * _lncosh(0.5 * point.gamma_t1)
    try:
        return math.exp(log_d)
    except OverflowError:
        return math.inf


def label_from_discriminant(d: float, tol: float = DEFAULT_TOL) -> PhaseLabel:
    if d < 1.0 - tol:
        return PhaseLabel.PTSP
    if d > 1.0 + tol:
        return PhaseLabel.PTBP
    return PhaseLabel.EP


def classify(point: DimensionlessPoint, tol: float = DEFAULT_TOL) -> PhaseLabel:
    return label_from_discriminant(discriminant(point), tol)


def canonical_multipliers(point: DimensionlessPoint) -> tuple[complex, complex]:
    """Multipliers of the canonical propagator from its trace and determinant, dominant first."""
    e = math.exp(-point.gamma_t1)
    tr = math.cos(0.5 * point.omega_t0) * (1.0 + e)
    big, small, _ = smallmat.quadratic_roots(tr, e)
    return big, small


def kappa_multiplier(point: DimensionlessPoint) -> float:
    """Per-period decay rate ``-2 ln|eta_+|`` of the canonical protocol."""
    eta = abs(canonical_multipliers(point)[0])
    return -2.0 * math.log(eta) if eta > 0 else math.inf


def quasi_energy(eta: complex, period: float) -> complex:
    """``i ln(eta) / T`` with the real part folded into ``(-pi/T, pi/T]``."""
    if eta == 0:
        return complex(math.nan, -math.inf)
    log = cmath.log(eta)
    phase = log.imag
    if phase == math.pi:
        phase = -math.pi
    # i * (ln|eta| + i phase) / T
    return complex(-phase / period, math.log(abs(eta)) / period)


@dataclass(frozen=True)
class FloquetSpectrum:
    multipliers: tuple[complex, complex]
    quasi_energies: tuple[complex, complex]
    modes: tuple[np.ndarray, np.ndarray]
    period: float
    phase: PhaseLabel
    degenerate: bool = False

    @property
    def kappa(self) -> float:
        """Per-period decay rate of the dominant mode, ``-2 ln|eta_+|``."""
        eta = abs(self.multipliers[0])
        return -2.0 * math.log(eta) if eta > 0 else math.inf


def spectrum_of(u: np.ndarray, period: float, modulus_tol: float = MODULUS_TOL) -> FloquetSpectrum:
    e = smallmat.eig2(u)
    l1, l2 = e.first.value, e.second.value
    if e.degenerate:
        phase = PhaseLabel.EP
    else:
        m1, m2 = abs(l1), abs(l2)
        same = abs(m1 - m2) <= modulus_tol * max(m1, m2)
        phase = PhaseLabel.PTSP if same else PhaseLabel.PTBP
    return FloquetSpectrum(
        multipliers=(l1, l2),
        quasi_energies=(quasi_energy(l1, period), quasi_energy(l2, period)),
        modes=(e.first.vector, e.second.vector),
        period=period,
        phase=phase,
        degenerate=e.degenerate,
    )


def floquet_spectrum(protocol: PulseProtocol, modulus_tol: float = MODULUS_TOL) -> FloquetSpectrum:
    """Diagonalise the one-period propagator of ``protocol``.

    The phase follows from the multiplier moduli: equal moduli (a conjugate
    pair up to the common loss factor) is PTSP, distinct moduli PTBP, and a
    defective propagator is the EP.
    """
    return spectrum_of(period_propagator(protocol), protocol.period, modulus_tol)


def ep_boundary(omega_t0: float) -> float:
    """Measurement strength at which the EP is reached for a given interval.

    Solves ``cos^2(omega_t0/2) cosh^2(gamma_t1/2) = 1`` for ``gamma_t1`` on
    ``0 < omega_t0 < pi``.
    """
    if not 0.0 < omega_t0 < math.pi:
        raise OutOfDomainError(f"omega_t0={omega_t0} outside (0, pi): no finite EP")
    half = 0.5 * omega_t0
    # arccosh(sec x) = log1p(z + sqrt(z (z + 2))), z = sec x - 1 = 2 sin^2(x/2) / cos x
    z = 2.0 * math.sin(0.5 * half) ** 2 / math.cos(half)
    return 2.0 * math.log1p(z + math.sqrt(z * (z + 2.0)))
