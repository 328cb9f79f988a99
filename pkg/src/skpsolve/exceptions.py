"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid discretization or run configuration."""


class HypothesisViolation(ValueError):
    """A structural hypothesis on the nonlinearity or model constants fails."""


class CalibrationError(RuntimeError):
    """The cone-neighbourhood radius could not be calibrated.

    ``suggested_mu`` carries a smaller radius that is expected to work.
    """

    def __init__(self, message, suggested_mu=None):
        super().__init__(message)
        self.suggested_mu = suggested_mu


class ParameterError(RuntimeError):
    """A geometric construction (endpoints, simplex scale) hit its growth cap."""
