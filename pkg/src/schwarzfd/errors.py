"""Exception types shared across the library.

Every numerical precondition failure maps to one of these, so callers can
distinguish "you asked for a value outside the scheme's branch" from "the
iteration did not converge" without parsing messages.
"""


class SchwarzFDError(Exception):
    """Base class for all library errors."""


class DomainError(SchwarzFDError):
    """Input outside the real domain of an operation (e.g. y' <= 0 where a
    3/2 power is taken, or x = y in the second-order equation)."""


class PoleError(SchwarzFDError):
    """Evaluation requested at (or numerically indistinguishable from) a pole
    of a closed-form solution or of a group flow."""


class BranchError(SchwarzFDError):
    """A square-root radicand of a scheme residual is not positive; the
    stencil left the monotone branch the scheme is defined on."""


class DegenerateStencilError(SchwarzFDError):
    """A cross-ratio or difference-quotient denominator is exactly zero."""


class ConvergenceError(SchwarzFDError):
    """The implicit stepper exhausted its iteration budget."""


class ZeroIntegralError(SchwarzFDError):
    """A transformation constant cannot be fitted because the integral it
    divides by vanishes at the fitting index."""
