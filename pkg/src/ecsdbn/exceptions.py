"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is outside its admissible range."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent."""


class DataError(ValueError):
    """Labels or samples violate a precondition (e.g. missing class)."""


class FormatError(ValueError):
    """A KEEL file or catalog could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StateError(RuntimeError):
    """An optimizer state does not support the requested step."""


class DegenerateInputError(ValueError):
    """The input carries no information for the requested statistic."""


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given confusion matrix."""


class DegenerateMetricWarning(UserWarning):
    """A metric hit a zero denominator and was reported as 0."""
