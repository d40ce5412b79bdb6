"""Phase-domain algebra for three-phase phasors.

The delta conversion matrix ``Gamma`` maps terminal (line-to-ground) voltages
to line-to-line voltages, ``V_delta = Gamma @ V``; its transpose maps internal
delta currents to (negated) terminal currents, ``I = -Gamma.T @ I_delta``.

The rotation operator is ``alpha = exp(-2j*pi/3)`` so that the positive
sequence ``(1, alpha, alpha**2)`` *lags* phase by phase.  Textbooks that use
``exp(+2j*pi/3)`` swap the roles of the positive and negative sequences.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import NotInRange

ALPHA: complex = cmath.exp(-2j * cmath.pi / 3)
ONES = np.ones(3, dtype=complex)
ALPHA_PLUS = np.array([1, ALPHA, ALPHA**2], dtype=complex)
ALPHA_MINUS = np.array([1, ALPHA**2, ALPHA], dtype=complex)
IDENTITY = np.eye(3, dtype=complex)

# eigenvalues of Gamma on (1, alpha_plus, alpha_minus); Gamma.T swaps the last two
EIG_PLUS: complex = 1 - ALPHA
EIG_MINUS: complex = 1 - ALPHA**2

RANGE_RTOL = 1e-9

_GAMMA = np.array([[1, -1, 0], [0, 1, -1], [-1, 0, 1]], dtype=complex)


def as_c3(x, name: str = "vector") -> np.ndarray:
    """Coerce ``x`` to a finite complex 3-vector."""
    arr = np.asarray(x, dtype=complex).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 entries, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_c3x3(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite complex 3x3 matrix."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def gamma() -> np.ndarray:
    """Return the conversion matrix ``Gamma`` (rows ab, bc, ca)."""
    return _GAMMA.copy()


def gamma_t() -> np.ndarray:
    return _GAMMA.T.copy()


def gamma_dagger() -> np.ndarray:
    """Moore-Penrose pseudo-inverse of ``Gamma``, which is ``Gamma.T / 3``."""
    return _GAMMA.T / 3


def gamma_t_dagger() -> np.ndarray:
    return _GAMMA / 3


def zero_sum_residual(b: np.ndarray) -> float:
    """``|1^T b|`` scaled by ``max(1, ||b||_inf)``."""
    b = np.asarray(b)
    return abs(b.sum()) / max(1.0, float(np.max(np.abs(b))))


def in_range(b, rtol: float = RANGE_RTOL) -> bool:
    """True when ``b`` lies in the range of ``Gamma`` (and of ``Gamma.T``)."""
    return zero_sum_residual(as_c3(b)) <= rtol


def solve_gamma(b, free: complex = 0.0) -> np.ndarray:
    """Solve ``Gamma @ x = b``, returning ``Gamma.T @ b / 3 + free * 1``.

    Raises :class:`NotInRange` when ``sum(b)`` is not zero to tolerance; such
    a ``b`` would violate KVL around a delta loop.
    """
    b = as_c3(b, "b")
    if not in_range(b):
        raise NotInRange(f"sum(b) = {b.sum():.3g} is not zero; b is outside range(Gamma)")
    return _GAMMA.T @ b / 3 + free * ONES


def solve_gamma_t(b, free: complex = 0.0) -> np.ndarray:
    """Solve ``Gamma.T @ x = b``, returning ``Gamma @ b / 3 + free * 1``."""
    b = as_c3(b, "b")
    if not in_range(b):
        raise NotInRange(f"sum(b) = {b.sum():.3g} is not zero; b is outside range(Gamma.T)")
    return _GAMMA @ b / 3 + free * ONES


@dataclass(frozen=True)
class SequenceComponents:
    """Symmetrical components with the 1/3 projection convention.

    ``x == zero * 1 + positive * alpha_plus + negative * alpha_minus``, so
    ``zero`` of a terminal voltage is the zero-sequence voltage ``sum(V) / 3``.
    """

    zero: complex
    positive: complex
    negative: complex

    def reconstruct(self) -> np.ndarray:
        return self.zero * ONES + self.positive * ALPHA_PLUS + self.negative * ALPHA_MINUS

    def magnitude(self) -> float:
        return float(np.sqrt(abs(self.zero) ** 2 + abs(self.positive) ** 2 + abs(self.negative) ** 2))


def sequence_components(x) -> SequenceComponents:
    x = as_c3(x, "x")
    return SequenceComponents(
        zero=complex(np.vdot(ONES, x) / 3),
        positive=complex(np.vdot(ALPHA_PLUS, x) / 3),
        negative=complex(np.vdot(ALPHA_MINUS, x) / 3),
    )


def diag_outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``diag(x y^H)``, i.e. the elementwise product ``x * conj(y)``."""
    return x * np.conj(y)
