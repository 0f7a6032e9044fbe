"""Exception hierarchy for the workbench."""


class FreelabError(Exception):
    """Base class for all workbench errors."""


class InfeasibleExtension(FreelabError):
    """Axial extension would require a fiber longer than its fixed length."""


class UnwoundSingularity(FreelabError):
    """End rotation has unwound the fiber helix completely (wrap angle <= 0)."""


class DegenerateAngle(FreelabError):
    """Winding angle outside the open interval (0, pi/2)."""


class NonPositiveStretch(FreelabError):
    """Principal stretch must be strictly positive."""


class OutOfRangeHardness(FreelabError):
    """Shore A hardness outside the valid (0, 100) range."""


class InsufficientData(FreelabError):
    """Not enough samples for the requested fit."""


class NoMinimumInInterval(FreelabError):
    """1D fit residual has no interior minimum over the search interval."""


class StepFailure(FreelabError):
    """Time integration produced a non-finite state."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoConvergence(FreelabError):
    """Nonlinear solver failed to reach the residual tolerance."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class DegenerateLeadingCoefficient(FreelabError):
    """Characteristic polynomial has a zero leading coefficient."""


class TimeOutOfRange(FreelabError):
    """Query time outside a trajectory segment's domain."""


class NotUnderdamped(FreelabError):
    """Vibration trace shows no oscillation; damping cannot be identified."""


class InsufficientPeaks(FreelabError):
    """Fewer than two usable oscillation peaks in the vibration trace."""


class ZeroDisplacementRange(FreelabError):
    """Static load data has no displacement spread to regress against."""


class ConfigError(FreelabError):
    """Invalid or missing configuration entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
