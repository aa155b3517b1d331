"""Exception and warning types shared across the package."""


class TsdynError(Exception):
    """Base class for all package-specific errors."""


class ScaleConstructionError(TsdynError):
    """A time scale description violates the construction invariants."""


class NotInScale(TsdynError):
    """A point was expected to belong to the time scale but does not."""


class BeforeScaleStart(TsdynError):
    """A query point lies strictly before the smallest scale element."""


class EndpointNotInScale(TsdynError):
    """An integration endpoint is not a scale point."""


class BadFraction(TsdynError):
    """The continuous-time fraction p/q of a mixed-regime scale needs p < q."""


class ParseError(TsdynError):
    """A config or scale-description file failed to parse."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class NonRegressiveValue(TsdynError):
    """1 + mu*p hit zero, the cylinder transformation is undefined."""


class NotPositivelyRegressive(TsdynError):
    """A comparison bound needs 1 + mu*p > 0, which failed at some point."""


class NegativeGain(TsdynError):
    """A Gronwall gain coefficient was sampled negative."""


class NonRegressiveJump(TsdynError):
    """E + mu*A is singular at a scattered point."""

    def __init__(self, t, message=""):
        self.t = t
        super().__init__(message or f"jump factor singular at t={t!r}")


class EigdecompositionFailed(TsdynError):
    """Eigendecomposition too ill-conditioned to trust (defective matrix)."""


class NotDiagonalizable(TsdynError):
    """A matrix required to be diagonalizable failed the conditioning guard."""


class ModeConditionFails(TsdynError):
    """Certificate mode requires strong stability/instability that does not hold."""


class RegressivityLost(TsdynError):
    """A perturbation pushed the coefficient outside the uniformly regressive class."""


class SupportViolation(TsdynError):
    """An ODE perturbation is nonzero too far from the time scale."""


class NotSyndetic(TsdynError):
    """The operation requires a syndetic scale (bounded tail gaps)."""


class CentralExponentNegative(TsdynError):
    """Destabilization requires a nonnegative central upper exponent estimate."""


class BudgetExceeded(TsdynError):
    """The projected perturbation norm exceeded the requested budget after retries."""


class HorizonTooShort(TsdynError):
    """The horizon cannot fit the minimum number of analysis blocks."""


class DegenerateAlignment(TsdynError):
    """A rotation plane could not be constructed."""


class RampTooWide(TsdynError):
    """Mollification ramp does not fit between rotation supports."""


class TubeOverlap(TsdynError):
    """Tube trajectories violate the separation inequality after rescaling retries."""


class EmpiricalProfileWarning(UserWarning):
    """A spectral verdict was computed from an empirical (non-exact) gap profile."""
