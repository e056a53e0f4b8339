"""Exception hierarchy shared by all modules."""


class ASMError(Exception):
    """Base class for errors raised by asmcmc."""


class DimensionError(ASMError, ValueError):
    """A point or matrix has the wrong dimension."""


class UnsupportedTargetError(ASMError):
    """The requested operation needs something the target does not provide."""


class UnsupportedDimensionError(ASMError):
    """Deterministic quadrature was requested above its dimension limit."""


class InvalidStateError(ASMError, ValueError):
    """The chain state lies outside the support of the target."""


class InvariantViolation(ASMError):
    """An algorithmic invariant was violated on entry to an operation."""


class ConfigError(ASMError, ValueError):
    """A configuration value is malformed or inconsistent."""


class BracketError(ASMError, ValueError):
    """A root-finding bracket does not straddle the requested level."""


class ProfileError(ASMError):
    """A radial proposal profile produced a non-finite value."""


class NumericalError(ASMError, FloatingPointError):
    """A numerical routine produced non-finite values or failed to converge."""


class CouplingError(ASMError):
    """Coupled chains diverged before the restriction first bound."""


class SinkError(ASMError, OSError):
    """A trace sink failed while receiving records."""

    def __init__(self, message, step):
        super().__init__(f"{message} (at step {step})")
        self.step = step
