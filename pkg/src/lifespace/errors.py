"""Exception types shared across the pipeline."""


class LifeSpaceError(Exception):
    """Base class for every error raised by this package."""


class InvalidPointError(LifeSpaceError, ValueError):
    """Latitude/longitude outside its legal range, or not finite."""


class InvalidPrecisionError(LifeSpaceError, ValueError):
    """Geohash precision outside [1, 12]."""


class InvalidGeohashError(LifeSpaceError, ValueError):
    """Empty geohash or a character outside the Base32 alphabet."""


class SchemaError(LifeSpaceError):
    """Fatal input problem: missing header, unknown columns, unreadable file."""


class UndefinedExposureError(LifeSpaceError):
    """A driver has no kept drives and no declared study-day count."""


class ConfigError(LifeSpaceError):
    """Invalid configuration, e.g. a relabel override to a closed category."""


class TrainingError(LifeSpaceError):
    """Model training could not complete (single class, non-convergence, ...)."""


class PredictionError(LifeSpaceError, ValueError):
    """Prediction requested for a non-finite feature vector."""


class SplitError(LifeSpaceError):
    """A usable train/test split could not be drawn."""


class FoldError(LifeSpaceError):
    """Cross-validation asked for more folds than samples."""


class SummaryError(LifeSpaceError):
    """Summary statistics requested for an empty value list."""
