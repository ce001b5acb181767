"""Exception types shared across the package."""


class QuantumActionError(Exception):
    """Base class for all package errors."""


# model
class NonPositiveTime(QuantumActionError):
    """Transition time must be positive."""


class Unbounded(QuantumActionError):
    """Potential is not bounded below (or has no isolated minima)."""


# propagator
class GridTooCoarse(QuantumActionError):
    """Richardson dt/dt2 comparison exceeded the configured tolerance."""


class NegativeKernel(QuantumActionError):
    """Euclidean kernel developed values below the -1e-12 noise floor."""


class Underflow(QuantumActionError):
    """Amplitude below the representable floor (1e-300)."""


class EmptyTable(QuantumActionError):
    """Every amplitude-table entry underflowed."""


class NotConverged(QuantumActionError):
    """Iterative estimate failed its convergence check."""


# classical path
class ConjugatePoint(QuantumActionError):
    """Second variation of the action is not positive definite at the solution."""


class NoConvergence(QuantumActionError):
    """Damped Newton exceeded its iteration cap."""


# fitting
class PathFailure(QuantumActionError):
    """Boundary-value solves kept failing at the optimizer's iterates."""


# instanton
class NoDoubleWell(QuantumActionError):
    """Potential has no degenerate double minima, so no instanton exists."""


class MissingEntry(QuantumActionError):
    """Requested transition time is absent from the parameter flow."""


# dynamics
class EmptyShell(QuantumActionError):
    """No phase-space samples exist at the requested energy."""


class Overflow(QuantumActionError):
    """Trajectory component exceeded 1e12 (escaping or unstable step)."""


class TooFewCrossings(QuantumActionError):
    """A trajectory produced fewer than two section crossings within the time cap."""


# pipeline
class ConfigError(QuantumActionError):
    """Run configuration is malformed; message carries the key path."""
