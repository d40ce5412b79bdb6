"""Exception hierarchy shared by the modelling, solving and I/O layers."""


class ThreePhaseError(Exception):
    """Base class for every error raised by this package."""


class NotInRange(ThreePhaseError, ValueError):
    """A right-hand side is not orthogonal to the all-ones vector."""


class KclViolation(ThreePhaseError, ValueError):
    """Terminal currents of a delta device do not sum to zero."""


class SingularImpedance(ThreePhaseError, ValueError):
    """An impedance matrix cannot be inverted at working precision."""


class WrongKind(ThreePhaseError, TypeError):
    """An operation was applied to a device kind it does not support."""


class ValidationError(ThreePhaseError, ValueError):
    """A model invariant does not hold.

    ``invariant`` names the rule that failed so callers (and the CLI) can
    report it without parsing the message.
    """

    def __init__(self, message: str, invariant: str = "", location: str = ""):
        self.invariant = invariant
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(prefix + message)


class DuplicateBus(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class NoVoltageSource(ValidationError):
    pass


class ParseError(ThreePhaseError, ValueError):
    """A network or solution file could not be parsed."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(prefix + message)


class ShapeMismatch(ThreePhaseError, ValueError):
    """A solution does not fit the network it is checked against."""


class SingularSystem(ThreePhaseError, ArithmeticError):
    """The reduced nodal system is singular or too ill-conditioned."""

    def __init__(self, message: str, rcond: float = 0.0):
        self.rcond = rcond
        super().__init__(message)


class SingularReducedSystem(SingularSystem):
    """The per-phase reduced matrix cannot be inverted."""


class MissingZeroSequence(ThreePhaseError, ValueError):
    """Lifting with nonzero neutral voltages needs the zero-sequence parts."""
