"""Exception hierarchy shared by every module."""


class FHurstError(Exception):
    """Base class for all package errors."""


class ParameterError(FHurstError, ValueError):
    """An argument is outside its admissible range."""


class ContractError(FHurstError, ValueError):
    """An input object violates a structural contract (shape, symmetry, grid)."""


class EstimationError(FHurstError, RuntimeError):
    """An estimator could not produce a value from the data it was given."""


class DegenerateSeriesError(EstimationError):
    """The input carries no variation (constant series, zero covariance)."""


class ConfigError(FHurstError, ValueError):
    """A benchmark configuration is malformed.

    ``field`` holds the dotted path of the offending entry.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
