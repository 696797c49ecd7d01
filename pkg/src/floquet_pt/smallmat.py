"""Fixed-shape complex linear algebra for 2x2 and 3x3 matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything here
is a pure function, so results can be shared across threads freely.

Conventions
-----------
``expm(m, t)`` returns the propagator ``exp(-i m t)`` (hbar = 1), not the
plain exponential of ``m``. Eigenvalues from :func:`eig2` are ordered by
descending modulus so that the dominant Floquet multiplier comes first.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# characteristic discriminant below this (relative to tr^2, 4 det) => defective
DEGENERACY_TOL = 1e-14
# relative tolerance used when ordering eigenvalues that tie in modulus
_TIE_TOL = 1e-12
# matpow: exact repeated products up to this power
_DIRECT_POWER_MAX = 64
# matpow: eigenvector basis condition number above which powers use squaring
_MAX_BASIS_COND = 1e4

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NonFiniteError(ValueError):
    """Raised when a matrix contains NaN or infinite entries."""


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray


class Eig2(NamedTuple):
    """Result of :func:`eig2`. ``degenerate`` marks a (numerically) defective matrix."""

    first: EigenPair
    second: EigenPair
    degenerate: bool


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Coerce ``m`` to a finite complex square matrix of size 2 or 3."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 3):
        raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix has non-finite entries")
    return a


def identity(dim: int = 2) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def trace(m) -> complex:
    a = as_matrix(m)
    return complex(np.trace(a))


def det(m) -> complex:
    a = as_matrix(m)
    if a.shape[0] == 2:
        return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    return complex(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def norm1(m) -> float:
    """Induced 1-norm (maximum absolute column sum)."""
    return float(np.max(np.sum(np.abs(m), axis=0)))


def quadratic_roots(tr: complex, dt: complex) -> tuple[complex, complex, complex]:
    """Roots of ``x^2 - tr x + dt`` and the discriminant ``tr^2 - 4 dt``.

    The larger-magnitude root is formed first and the other from
    ``dt / root``, which avoids cancellation when the roots differ a lot
    in size.
    """
    tr = complex(tr)
    dt = complex(dt)
    disc = tr * tr - 4.0 * dt
    s = cmath.sqrt(disc)
    # pick the sign of the square root that adds constructively to tr
    if (tr.conjugate() * s).real < 0:
        s = -s
    big = 0.5 * (tr + s)
    small = dt / big if big != 0 else 0.5 * (tr - s)
    return big, small, disc


def _order_key_greater(a: complex, b: complex) -> bool:
    """True if ``a`` sorts before ``b``: modulus, then real, then imaginary, all descending."""
    scale = max(abs(a), abs(b), 1e-300)
    for x, y in ((abs(a), abs(b)), (a.real, b.real), (a.imag, b.imag)):
        if abs(x - y) > _TIE_TOL * scale:
            return x > y
    return False


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _eigvec2(a: np.ndarray, lam: complex) -> np.ndarray:
    """Unit null vector of ``a - lam I`` for a 2x2 ``a``."""
    m00, m01, m10, m11 = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    # two candidate vectors from the two rows; take the better-conditioned one
    v1 = np.array([m01, lam - m00], dtype=complex)
    v2 = np.array([lam - m11, m10], dtype=complex)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    scale = max(np.max(np.abs(a)), abs(lam), 1e-300)
    if max(n1, n2) <= 1e-13 * scale:
        # a is (numerically) lam * I on both rows: any vector works
        return np.array([1.0, 0.0], dtype=complex)
    return _unit(v1 if n1 >= n2 else v2)


def eig2(m) -> Eig2:
    """Eigen-decomposition of a 2x2 complex matrix.

    Eigenvalues are the roots of ``x^2 - tr(m) x + det(m)``, ordered by
    descending modulus (ties: descending real part, then imaginary part).
    When the characteristic discriminant vanishes relative to its scale the
    matrix is treated as defective: both pairs carry the same value and the
    same vector, and ``degenerate`` is set.
    """
    a = as_matrix(m, 2)
    tr = complex(a[0, 0] + a[1, 1])
    dt = complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    l1, l2, disc = quadratic_roots(tr, dt)
    scale = max(abs(tr) ** 2, 4.0 * abs(dt))
    if abs(disc) <= DEGENERACY_TOL * scale:
        lam = 0.5 * tr
        pair = EigenPair(lam, _eigvec2(a, lam))
        return Eig2(pair, pair, True)
    if _order_key_greater(l2, l1):
        l1, l2 = l2, l1
    diagonal = abs(a[0, 1]) == 0 and abs(a[1, 0]) == 0
    if diagonal:
        # distinct eigenvalues of a diagonal matrix: the basis vectors
        e1 = np.array([1.0, 0.0], dtype=complex)
        e2 = np.array([0.0, 1.0], dtype=complex)
        v1, v2 = (e1, e2) if abs(l1 - a[0, 0]) <= abs(l1 - a[1, 1]) else (e2, e1)
    else:
        v1, v2 = _eigvec2(a, l1), _eigvec2(a, l2)
    return Eig2(EigenPair(l1, v1), EigenPair(l2, v2), False)


def _series_exp(a: np.ndarray) -> np.ndarray:
    """Plain exponential ``exp(a)`` by scaling and squaring a Taylor series."""
    nrm = norm1(a)
    squarings = 0
    if nrm > 0.5:
        squarings = int(math.ceil(math.log2(nrm / 0.5)))
    b = a / (2.0 ** squarings)
    eye = np.eye(a.shape[0], dtype=complex)
    result = eye.copy()
    term = eye.copy()
    for k in range(1, 40):
        term = term @ b / k
        result = result + term
        if norm1(term) <= 1e-17 * norm1(result):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def _closed_exp2(a: np.ndarray) -> np.ndarray:
    """Plain exponential of a 2x2 matrix via the Cayley-Hamilton closed form.

    ``exp(a) = e^mu [cosh(d) I + sinh(d)/d (a - mu I)]`` with ``mu = tr/2``
    and ``d^2 = mu^2 - det``. Valid at the defective point too (sinh(d)/d -> 1).
    """
    mu = 0.5 * complex(a[0, 0] + a[1, 1])
    dt = complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    d = cmath.sqrt(mu * mu - dt)
    if abs(d) < 1e-4:
        d2 = d * d
        sinhc = 1 + d2 / 6 * (1 + d2 / 20 * (1 + d2 / 42))
    else:
        sinhc = cmath.sinh(d) / d
    eye = np.eye(2, dtype=complex)
    return cmath.exp(mu) * (cmath.cosh(d) * eye + sinhc * (a - mu * eye))


def expm(m, t: float = 1.0, method: str = "series") -> np.ndarray:
    """Propagator ``exp(-i m t)`` for a 2x2 or 3x3 generator ``m``.

    Parameters
    ----------
    m : array_like
        Hamiltonian (need not be Hermitian).
    t : float
        Elapsed time, ``t >= 0``.
    method : {"series", "closed"}
        ``"series"`` uses scaling and squaring with a truncated Taylor
        series and works for both sizes. ``"closed"`` uses the 2x2
        Cayley-Hamilton closed form.
    """
    if t < 0:
        raise ValueError("expm requires t >= 0")
    a = as_matrix(m)
    if t == 0:
        return np.eye(a.shape[0], dtype=complex)
    gen = -1j * a * t
    if method == "series":
        return _series_exp(gen)
    if method == "closed":
        if a.shape[0] != 2:
            raise ValueError("closed-form expm is only available for 2x2 matrices")
        return _closed_exp2(gen)
    raise ValueError(f"unknown expm method {method!r}")


def _binary_power(a: np.ndarray, n: int) -> np.ndarray:
    result = np.eye(a.shape[0], dtype=complex)
    base = a.copy()
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result


def matpow(m, n: int) -> np.ndarray:
    """``m**n`` for a 2x2 matrix and integer ``n >= 0``.

    Up to n = 64 this is the literal repeated product. Beyond that the
    eigen-decomposition is used (``V diag(lambda^n) V^-1``) unless the matrix
    is defective or its eigenvector basis is badly conditioned, in which
    case binary exponentiation takes over.
    """
    if n < 0:
        raise ValueError("matpow requires n >= 0")
    a = as_matrix(m, 2)
    if n <= _DIRECT_POWER_MAX:
        result = np.eye(2, dtype=complex)
        for _ in range(n):
            result = result @ a
        return result
    e = eig2(a)
    if e.degenerate:
        return _binary_power(a, n)
    v = np.column_stack([e.first.vector, e.second.vector])
    if np.linalg.cond(v) > _MAX_BASIS_COND:
        return _binary_power(a, n)
    powers = np.array([e.first.value ** n, e.second.value ** n])
    return (v * powers) @ np.linalg.inv(v)
