"""Exception hierarchy shared by all modules.

CLI exit codes: ConfigError -> 2, DataError (and subclasses) -> 3,
NumericFailure -> 4.
"""


class NcaaError(Exception):
    pass


class ConfigError(NcaaError):
    """Invalid parameters, option combinations or config-file keys."""


class DataError(NcaaError):
    """Bad input data: parse failures, non-finite values, shape mismatches."""


class ShapeError(DataError):
    """Dimension mismatch between operands."""


class GenerationError(DataError):
    """Synthetic-data generation could not satisfy its constraints."""


class MetricError(DataError):
    """A metric is undefined for the given inputs (e.g. constant vector)."""


class NumericFailure(NcaaError):
    """Non-finite value encountered inside an iterative solve."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
