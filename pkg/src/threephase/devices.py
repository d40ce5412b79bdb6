"""Single-terminal three-phase devices.

Each device is an ideal voltage source, current source or impedance in wye
(``Y``) or delta configuration.  Its internal model fixes the quantities
across the three constituent single-phase devices; the configuration supplies
the conversion rule to the terminal quantities seen by the network.

Sign conventions: the terminal current ``I`` is the injection *out of* the
device into the bus, while internal current and power are measured in the
direction of the current *through* each single-phase device.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import phasor
from .errors import KclViolation, NotInRange, SingularImpedance, ValidationError, WrongKind
from .phasor import ONES, as_c3, as_c3x3, diag_outer

IMPEDANCE_RCOND = 1e-12
KCL_RTOL = 1e-9


def _rcond(m: np.ndarray) -> float:
    try:
        c = np.linalg.cond(m)
    except np.linalg.LinAlgError:
        return 0.0
    return 0.0 if not np.isfinite(c) else 1.0 / c


def _invert_impedance(z: np.ndarray) -> np.ndarray:
    rc = _rcond(z)
    if rc < IMPEDANCE_RCOND:
        raise SingularImpedance(f"impedance matrix is singular (rcond={rc:.2e})")
    return np.linalg.inv(z)


# --- device specifications ------------------------------------------------


@dataclass(frozen=True, eq=False)
class VoltageSourceY:
    """Wye source with internal voltage ``e`` and neutral voltage ``gamma``."""

    e: np.ndarray
    gamma: complex = 0j

    kind = "voltage_source"
    config = "Y"

    def __post_init__(self):
        object.__setattr__(self, "e", as_c3(self.e, "e"))
        object.__setattr__(self, "gamma", complex(self.gamma))


@dataclass(frozen=True, eq=False)
class VoltageSourceDelta:
    """Delta source with line-to-line voltage ``e``.

    ``gamma`` is the zero-sequence terminal voltage ``sum(V)/3`` and ``beta``
    the loop current ``sum(I_delta)/3``; neither is visible in ``e``.
    """

    e: np.ndarray
    gamma: complex = 0j
    beta: complex = 0j

    kind = "voltage_source"
    config = "delta"

    def __post_init__(self):
        e = as_c3(self.e, "e")
        if not phasor.in_range(e):
            raise ValidationError(
                f"delta source voltages sum to {e.sum():.3g}, violating KVL around the loop",
                invariant="kvl",
            )
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "beta", complex(self.beta))


@dataclass(frozen=True, eq=False)
class CurrentSourceY:
    j: np.ndarray
    gamma: complex = 0j

    kind = "current_source"
    config = "Y"

    def __post_init__(self):
        object.__setattr__(self, "j", as_c3(self.j, "j"))
        object.__setattr__(self, "gamma", complex(self.gamma))


@dataclass(frozen=True, eq=False)
class CurrentSourceDelta:
    j: np.ndarray

    kind = "current_source"
    config = "delta"

    def __post_init__(self):
        object.__setattr__(self, "j", as_c3(self.j, "j"))

    @property
    def beta(self) -> complex:
        return complex(self.j.sum() / 3)


@dataclass(frozen=True, eq=False)
class ImpedanceY:
    z: np.ndarray
    gamma: complex = 0j
    y: np.ndarray = field(init=False, repr=False)

    kind = "impedance"
    config = "Y"

    def __post_init__(self):
        z = as_c3x3(self.z, "z")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "y", _invert_impedance(z))


@dataclass(frozen=True, eq=False)
class ImpedanceDelta:
    z: np.ndarray
    beta: complex = 0j
    y: np.ndarray = field(init=False, repr=False)

    kind = "impedance"
    config = "delta"

    def __post_init__(self):
        z = as_c3x3(self.z, "z")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "y", _invert_impedance(z))


DeviceSpec = Union[
    VoltageSourceY, VoltageSourceDelta, CurrentSourceY, CurrentSourceDelta, ImpedanceY, ImpedanceDelta
]
DEVICE_TYPES = (VoltageSourceY, VoltageSourceDelta, CurrentSourceY, CurrentSourceDelta, ImpedanceY, ImpedanceDelta)


def is_delta(spec: DeviceSpec) -> bool:
    return spec.config == "delta"


# --- terminal / internal state --------------------------------------------


@dataclass(frozen=True, eq=False)
class TerminalState:
    v: np.ndarray
    i: np.ndarray
    s: np.ndarray

    @classmethod
    def from_vi(cls, v, i) -> "TerminalState":
        v = np.asarray(v, dtype=complex)
        i = np.asarray(i, dtype=complex)
        return cls(v=v, i=i, s=diag_outer(v, i))


@dataclass(frozen=True, eq=False)
class InternalState:
    """Quantities across the single-phase devices.

    ``beta`` is ``None`` for wye devices.
    """

    v_int: np.ndarray
    i_int: np.ndarray
    s_int: np.ndarray
    gamma: complex
    beta: complex | None = None


def y_internal_from_terminal(v, i, gamma: complex) -> InternalState:
    v = as_c3(v, "v")
    i = as_c3(i, "i")
    v_int = v - gamma * ONES
    i_int = -i
    return InternalState(v_int, i_int, diag_outer(v_int, i_int), complex(gamma), None)


def kcl_residual(i) -> float:
    return phasor.zero_sum_residual(np.asarray(i))


def delta_internal_from_terminal(v, i, beta: complex, check: bool = True) -> InternalState:
    """Recover the delta internal state from terminal ``(v, i)``.

    The internal current is ``-Gamma @ i / 3 + beta``.  With ``check`` the
    terminal currents must satisfy KCL (``sum(i) == 0``); otherwise the
    zero-sequence part of ``i`` is silently projected out.
    """
    v = as_c3(v, "v")
    i = as_c3(i, "i")
    if check and kcl_residual(i) > KCL_RTOL:
        raise KclViolation(f"terminal currents sum to {i.sum():.3g}; a delta device needs sum(I) = 0")
    v_int = phasor.gamma() @ v
    i_int = -(phasor.gamma() @ i) / 3 + beta * ONES
    return InternalState(v_int, i_int, diag_outer(v_int, i_int), complex(v.sum() / 3), complex(beta))


def delta_terminal_power(v_int, i_int, gamma: complex) -> np.ndarray:
    """Terminal power injection of a delta device from its internal state."""
    v_int = as_c3(v_int, "v_int")
    i_int = as_c3(i_int, "i_int")
    if not phasor.in_range(v_int):
        raise NotInRange("internal delta voltages must sum to zero")
    g = phasor.gamma()
    i_term = -(g.T @ i_int)
    return -np.diag(phasor.gamma_dagger() @ np.outer(v_int, i_int.conj()) @ g) + gamma * i_term.conj()


def delta_internal_power(v, i, beta: complex) -> np.ndarray:
    """Internal delta power from terminal ``(v, i)`` and loop current ``beta``.

    The loop-current term is ``conj(beta) * V_delta`` since power is
    ``V * conj(I)``.
    """
    v = as_c3(v, "v")
    i = as_c3(i, "i")
    if kcl_residual(i) > KCL_RTOL:
        raise KclViolation(f"terminal currents sum to {i.sum():.3g}; a delta device needs sum(I) = 0")
    g = phasor.gamma()
    v_delta = g @ v
    return -np.diag(g @ np.outer(v, i.conj()) @ phasor.gamma_dagger()) + np.conj(beta) * v_delta


def delta_admittance(y_delta) -> np.ndarray:
    """Terminal admittance ``Gamma.T @ y_delta @ Gamma`` of a delta impedance."""
    y_delta = as_c3x3(y_delta, "y_delta")
    g = phasor.gamma()
    return g.T @ y_delta @ g


# --- external models --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FixedVoltage:
    v: np.ndarray


@dataclass(frozen=True, eq=False)
class FixedCurrent:
    i: np.ndarray


@dataclass(frozen=True, eq=False)
class Admittance:
    """Affine terminal law ``i = -y_eff @ v + i_offset``."""

    y_eff: np.ndarray
    i_offset: np.ndarray


ExternalRelation = Union[FixedVoltage, FixedCurrent, Admittance]


def external_model(spec: DeviceSpec) -> ExternalRelation:
    if isinstance(spec, VoltageSourceY):
        return FixedVoltage(spec.e + spec.gamma * ONES)
    if isinstance(spec, VoltageSourceDelta):
        return FixedVoltage(phasor.gamma_dagger() @ spec.e + spec.gamma * ONES)
    if isinstance(spec, CurrentSourceY):
        return FixedCurrent(-spec.j)
    if isinstance(spec, CurrentSourceDelta):
        return FixedCurrent(-(phasor.gamma_t() @ spec.j))
    if isinstance(spec, ImpedanceY):
        return Admittance(spec.y.copy(), spec.y @ (spec.gamma * ONES))
    if isinstance(spec, ImpedanceDelta):
        return Admittance(delta_admittance(spec.y), np.zeros(3, dtype=complex))
    raise WrongKind(f"unknown device {type(spec).__name__}")


def delta_to_y(spec: DeviceSpec) -> DeviceSpec:
    """Wye equivalent of a delta source with the same external model.

    Only the terminal behaviour is preserved: the equivalent of a delta
    current source gets ``gamma = 0`` and the loop current of a delta voltage
    source is dropped.
    """
    if isinstance(spec, VoltageSourceDelta):
        return VoltageSourceY(phasor.gamma_dagger() @ spec.e, spec.gamma)
    if isinstance(spec, CurrentSourceDelta):
        # Y source injects -j_y, delta source injects -Gamma.T @ j_delta
        return CurrentSourceY(phasor.gamma_t() @ spec.j, 0j)
    raise WrongKind(f"delta_to_y needs a delta source, got {type(spec).__name__}")


def internal_state(spec: DeviceSpec, v, i, check_kcl: bool = True) -> InternalState:
    """Internal state of ``spec`` given its solved terminal ``(v, i)``."""
    if isinstance(spec, (VoltageSourceY, CurrentSourceY, ImpedanceY)):
        return y_internal_from_terminal(v, i, spec.gamma)
    if isinstance(spec, CurrentSourceDelta):
        v = as_c3(v, "v")
        v_int = phasor.gamma() @ v
        return InternalState(v_int, spec.j.copy(), diag_outer(v_int, spec.j), complex(v.sum() / 3), spec.beta)
    if isinstance(spec, (VoltageSourceDelta, ImpedanceDelta)):
        return delta_internal_from_terminal(v, i, spec.beta, check=check_kcl)
    raise WrongKind(f"unknown device {type(spec).__name__}")
