"""Exception types shared across the package."""


class FastfishError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(FastfishError, ValueError):
    """An argument violates a documented precondition."""


class EmptyPoolError(InvalidInputError):
    """An operation that needs at least one instance received none."""


class NumericalError(FastfishError, ArithmeticError):
    """A numerically impossible or unstable state was reached."""


class TrainingError(FastfishError, RuntimeError):
    """Classifier training produced non-finite values."""


class ConfigError(FastfishError, ValueError):
    """Experiment configuration is missing, malformed, or inconsistent."""


class FormatError(FastfishError, ValueError):
    """A binary container or results file cannot be parsed.

    Carries the byte offset at which parsing failed when it is known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DataValidationError(FastfishError, ValueError):
    """Parsed or supplied data violates a dataset invariant."""


class AggregationError(FastfishError, ValueError):
    """Result streams cannot be combined (mismatched grids or protocols)."""
