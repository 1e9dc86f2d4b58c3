"""Exception types shared across the package."""


class CrPowerError(Exception):
    """Base class for all package-specific errors."""


class DegenerateSensingError(CrPowerError):
    """A sensing decision has probability zero, so its posterior is 0/0."""


class DegenerateDistributionError(CrPowerError):
    """A continuous conditional density was requested for a point mass."""


class UnboundedWaterLevelError(CrPowerError):
    """All multiplier terms vanished, so the water level is infinite."""


class QuadratureError(CrPowerError):
    """A quadrature evaluation produced a non-finite value."""


class UndefinedEnergyEfficiencyError(CrPowerError):
    """Total consumed power is zero, so the efficiency ratio is undefined."""


class InnerLoopError(CrPowerError):
    """The multiplier search did not reach the slackness tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class UnsupportedCombinationError(CrPowerError):
    """The requested constraint regime / CSI level pair has no policy."""


class ScenarioParseError(CrPowerError):
    """A scenario file could not be parsed; carries the offending line."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
