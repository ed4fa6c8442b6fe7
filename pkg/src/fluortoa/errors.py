"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`FluorToaError`; the CLI maps the subclasses onto exit codes.
"""


class FluorToaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(FluorToaError, ValueError):
    """Invalid or inconsistent configuration value."""

    exit_code = 2


class GridError(ConfigError):
    """The spatial grid cannot represent the requested state."""


class StepSizeError(ConfigError):
    """Time step too coarse for the requested rates."""


class NumericalValidityError(FluorToaError, RuntimeError):
    """A run finished but its result cannot be trusted."""

    exit_code = 3


class BoundaryError(NumericalValidityError):
    """Probability density reached the periodic grid boundary."""


class ConvergenceError(NumericalValidityError):
    """The run stopped before the quantity of interest settled."""


class DomainError(NumericalValidityError):
    """Input lies outside the validity domain of a formula."""


class UsageError(FluorToaError, ValueError):
    """An API function was called with arguments it does not accept."""
