"""Unbalanced three-phase network analysis with a per-phase fast path."""

from .devices import (
    CurrentSourceDelta,
    CurrentSourceY,
    ImpedanceDelta,
    ImpedanceY,
    VoltageSourceDelta,
    VoltageSourceY,
    delta_to_y,
    external_model,
)
from .errors import (
    NoVoltageSource,
    SingularReducedSystem,
    SingularSystem,
    ThreePhaseError,
    ValidationError,
)
from .network import Bus, LineSpec, Network, assemble
from .perphase import (
    build_per_phase,
    check_balanced,
    lift,
    solve_balanced,
    solve_per_phase,
    zero_sequence_relation,
    zero_sequence_voltages,
)
from .phasor import ALPHA, ALPHA_MINUS, ALPHA_PLUS, ONES, sequence_components
from .solver import Solution, residuals, solve

__all__ = [
    "ALPHA",
    "ALPHA_MINUS",
    "ALPHA_PLUS",
    "ONES",
    "Bus",
    "CurrentSourceDelta",
    "CurrentSourceY",
    "ImpedanceDelta",
    "ImpedanceY",
    "LineSpec",
    "Network",
    "NoVoltageSource",
    "SingularReducedSystem",
    "SingularSystem",
    "Solution",
    "ThreePhaseError",
    "ValidationError",
    "VoltageSourceDelta",
    "VoltageSourceY",
    "assemble",
    "build_per_phase",
    "check_balanced",
    "delta_to_y",
    "external_model",
    "lift",
    "residuals",
    "sequence_components",
    "solve",
    "solve_balanced",
    "solve_per_phase",
    "zero_sequence_relation",
    "zero_sequence_voltages",
]
