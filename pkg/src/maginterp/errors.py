"""Exception hierarchy shared by all modules."""


class MagInterpError(Exception):
    """Base class for every error raised by maginterp."""


class InputError(MagInterpError, ValueError):
    """Malformed or out-of-contract input."""


class DomainError(InputError):
    """A parameter lies outside the domain where a formula is defined."""


class UnsupportedParameterError(InputError):
    pass


class PreconditionError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegrationError(MagInterpError):
    """ODE integration or quadrature failure."""


class IntegrabilityError(IntegrationError):
    """An integral diverges under the declared tail model."""


class SolverError(MagInterpError):
    """Shooting or root-finding failed to bracket or converge."""


class CurveError(MagInterpError):
    """Sampled curve violates its contract (e.g. non-monotone samples)."""


class RangeError(DomainError):
    """Requested value lies outside a sampled curve's range."""


class AccuracyError(MagInterpError):
    """Two independent methods disagree beyond tolerance."""
