"""Exception hierarchy shared by all otto_lab modules.

Each class maps onto one of the runner exit codes, so the CLI can translate
an exception into a status without inspecting messages.
"""


class OttoLabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConstructionError(OttoLabError, ValueError):
    """Invalid parameters when building a grid or model."""

    exit_code = 2


class DomainError(OttoLabError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class NumericalError(OttoLabError, ArithmeticError):
    """A computation produced an unusable value (zero divisor, NaN, ...)."""


class SolverError(OttoLabError, RuntimeError):
    """An iterative solver failed to converge.

    The last residuals are kept on the instance for diagnostics.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CurvatureRefusal(OttoLabError):
    """The requested curvature mode is not certified for the given space."""

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(OttoLabError, ValueError):
    """Malformed or inconsistent experiment configuration."""

    exit_code = 2


class SeriesError(OttoLabError, KeyError):
    """A requested plot series is absent from a run report."""

    exit_code = 2

    def __str__(self):
        return str(self.args[0]) if self.args else ""
