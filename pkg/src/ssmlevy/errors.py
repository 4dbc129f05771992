"""Exception hierarchy shared by the library and the CLI."""


class SSMError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1


class ConfigError(SSMError, ValueError):
    """Malformed family spec or run configuration."""

    exit_code = 1


class RegimeError(SSMError, ValueError):
    """Parameters outside the admissible regime of a formula."""

    exit_code = 2


class QuadratureError(SSMError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    exit_code = 3

    def __init__(self, message, interval=None):
        super().__init__(message if interval is None else f"{message} on {interval}")
        self.interval = interval


class RootNotBracketed(SSMError, RuntimeError):
    exit_code = 3


class ConvergenceError(SSMError, RuntimeError):
    """A series, product or extrapolation did not converge."""

    exit_code = 3


class InversionUnstable(SSMError, RuntimeError):
    exit_code = 4


class SimulationError(SSMError, RuntimeError):
    exit_code = 3
