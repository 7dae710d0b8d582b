"""Exception types shared across the package."""


class ScfsError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(ScfsError):
    """Shapes, counts, or index ranges are inconsistent."""


class DomainError(ScfsError):
    """A numeric argument lies outside its valid domain."""


class NumericalError(ScfsError):
    """An iterative numerical routine failed to converge or went inconsistent."""


class PartitionError(ScfsError):
    """A label vector does not induce the required non-empty groups."""


class SelectionEmptyError(ScfsError):
    """A feature-selection rule returned no features."""


class GenerationError(ScfsError):
    """Synthetic data generation could not satisfy its constraints."""


class CsvFormatError(ScfsError):
    """A CSV file could not be parsed as a numeric matrix."""


class ConfigError(ScfsError):
    """An experiment configuration document is malformed."""
