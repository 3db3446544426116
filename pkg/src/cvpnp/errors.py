"""Exception types raised by the simulator."""


class InvalidArgument(ValueError):
    """A parameter is outside its physical domain."""


class UnreachableSetpoint(ValueError):
    """The modulator cannot reach the requested coherent state."""


class NoReference(ValueError):
    """Homodyne measurement attempted without local-oscillator light."""


class InsufficientData(ValueError):
    """Too few or degenerate points for a fit."""


class ShapeError(ValueError):
    """Inputs have mismatched shapes."""


class SingularInput(ValueError):
    """Key-rate formula evaluated at a singular point."""


class ConfigError(ValueError):
    """Invalid link or scenario configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
