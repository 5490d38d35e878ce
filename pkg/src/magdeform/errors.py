"""Exception hierarchy shared by all modules."""


class MagDeformError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(MagDeformError, ValueError):
    """An argument violates a documented precondition."""


class DomainTruncationError(MagDeformError):
    """Significant mass reaches the edge of the periodic box.

    Attributes
    ----------
    leakage : float
        The measured mass fraction that triggered the error.
    """

    def __init__(self, message, leakage):
        super().__init__(f"{message} (measured leakage {leakage:.3e})")
        self.leakage = leakage


class ResolutionError(MagDeformError):
    """A quadrature or basis is too coarse for the requested accuracy."""

    def __init__(self, message, estimate=None):
        if estimate is not None:
            message = f"{message} (achieved estimate {estimate:.3e})"
        super().__init__(message)
        self.estimate = estimate


class SingularPhaseError(MagDeformError):
    """The Mehler phase is evaluated too close to a caustic (cos t ~ 0)."""


class InconsistentFamilyError(MagDeformError):
    """Analytic and finite-difference Jacobians of a magnetic family disagree."""


class DegenerateBandError(MagDeformError):
    """A two-sided band was requested for profiles that touch zero."""


class OrderSwapError(MagDeformError):
    """Iterated integrals computed in the two orders disagree."""
