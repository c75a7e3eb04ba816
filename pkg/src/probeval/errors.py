"""Exception and warning types shared across the package."""


class ProbevalError(Exception):
    """Base class for every error this package raises deliberately."""


class NotConvertibleError(ProbevalError):
    """A forecast cannot be converted to the requested form."""


class InvalidLevelError(ProbevalError):
    """A probability level lies outside the open interval (0, 1)."""


class InvalidBetaError(ProbevalError):
    """An energy-score exponent lies outside (0, 2]."""


class InvalidScaleError(ProbevalError):
    """A weight reference scale is not strictly positive."""


class OutsideSupportError(ProbevalError):
    """An observation falls outside the histogram grid."""


class EmptyBatchError(ProbevalError):
    """A batch operation received no records."""


class UnknownMetricError(ProbevalError):
    """A metric identifier is not in the registry."""


class NotComparableError(ProbevalError):
    """Fewer than two models share complete data, so ranking is impossible."""


class NoInformativeDatasetsError(ProbevalError):
    """Every dataset was dropped as zero-variance."""


class InvalidScenarioError(ProbevalError):
    """A synthetic scenario specification is inconsistent."""


class RecordParseError(ProbevalError):
    """A record in an input file is malformed; carries the line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownFormError(RecordParseError):
    """A forecast record declares an unrecognized forecast type."""


class AmbiguousFormError(RecordParseError):
    """A forecast record mixes fields from more than one forecast form."""


class DuplicateKeyError(ProbevalError):
    """Two run records share the same (model, dataset, fold, metric) key."""


class InvalidValueError(ProbevalError):
    """A run record carries a non-finite metric value."""


class QuantileCrossingWarning(UserWarning):
    """Non-monotone quantile values were repaired by sorting."""


class DroppedDatasetWarning(UserWarning):
    """A dataset was dropped during leaderboard aggregation."""


class ConversionWarning(UserWarning):
    """A metric was computed through a lossy forecast conversion."""
