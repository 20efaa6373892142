"""Exception types raised across the package."""


class KfsError(ValueError):
    """Base class for all domain errors."""


class AnnotationError(KfsError):
    """Annotation data violates a structural invariant (overlap, range, ...)."""


class UndefinedMetricError(KfsError):
    """A metric is requested on inputs where it has no defined value."""


class UndefinedCorrelationError(KfsError):
    """Rank correlation is undefined (zero rank variance or too few points)."""


class DegenerateWeightsError(KfsError):
    """A sampling CDF was requested from an all-zero weight vector."""


class InvalidClusteringError(KfsError):
    """A clustering result is unusable (e.g. contains an empty cluster)."""


class NormalizationError(KfsError):
    """Feature rows cannot be normalized (zero-norm row)."""


class BinningError(KfsError):
    """A binned statistic was requested with more bins than frames."""


class InfeasibleError(KfsError):
    """A generation request cannot be satisfied by the given video/annotation."""


class CapacityError(InfeasibleError):
    """Requested key-frame count exceeds annotated scene capacity."""

    def __init__(self, message, achievable_max=None):
        super().__init__(message)
        self.achievable_max = achievable_max


class FormatError(KfsError):
    """A file does not conform to its on-disk format."""
