"""Exception hierarchy shared by all oplab modules."""


class OplabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OplabError):
    """Argument outside the mathematical domain of the operation."""


class PrecisionExhausted(OplabError):
    """Adaptive precision reached its bit cap without two-level agreement."""


class NonConvergence(OplabError):
    """Quadrature step-halving stalled before reaching the target."""


class StepUnderflow(OplabError):
    """Finite-difference step indistinguishable from zero at working precision."""


class CrossCheckMismatch(OplabError):
    """Two independent computation routes disagree beyond certified bounds."""


class EigenNonConvergence(OplabError):
    """Tridiagonal eigenvalue iteration failed to converge."""


class PropertyViolation(OplabError):
    """A checked structural property failed.

    Carries the failing item name, its margin and, when available, the full
    report that was being assembled.
    """

    def __init__(self, item, margin, report=None):
        super().__init__(f"property violated: {item} (margin {margin})")
        self.item = item
        self.margin = margin
        self.report = report


class InsufficientZeros(OplabError):
    """Interval contains too few zeros for the requested check."""


class RootBracketFailure(OplabError):
    """Could not bracket the positive root of the endpoint quartic."""


class IllConditionedFit(OplabError):
    """Least-squares design matrix condition number exceeds the threshold."""


class SingularAtZero(OplabError):
    """Asymptotic expansion requested at t = 0 where every expansion is singular."""


class DivisionHazard(OplabError):
    """Denominator below the precision-dependent safety threshold."""


class RemainderBelowNoise(OplabError):
    """Remainder magnitudes sit inside the certified noise floor.

    Treated as a pass-by-saturation: the exception carries the per-point
    diagnostics collected before the fit was abandoned.
    """

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points or []


class UsageError(OplabError):
    """Invalid command-line invocation."""


class IoError(OplabError):
    """Failed to write an output artifact."""
