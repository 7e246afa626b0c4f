"""Exception and warning types shared across the package."""


class AerofactorError(Exception):
    """Base class for all errors raised by this package."""


# -------- tensor / matrix layer --------

class UnimputedData(AerofactorError):
    """Operation requires a fully observed tensor but the mask has gaps."""


class ShapeMismatch(AerofactorError, ValueError):
    """Array shapes or index lengths disagree with the declared layout."""


class NegativeEntry(AerofactorError, ValueError):
    """A non-negative matrix contains a negative value."""


class AllMissingFeature(AerofactorError):
    """A (station, feature) series has no observations to impute from."""


# -------- ingest --------

class MalformedRow(AerofactorError, ValueError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownStation(AerofactorError):
    """A data row references a station_id absent from the catalog."""


class NegativeConcentration(AerofactorError, ValueError):
    """A species concentration is negative."""


class DuplicateSample(AerofactorError):
    """Two rows define the same (station, timestamp) cell."""


class IncompatibleCadence(AerofactorError):
    """Series cadence does not divide the tensor step."""


class IrregularCadenceWarning(UserWarning):
    """More than 5% of timestamp steps deviate from the modal cadence."""


# -------- factorization --------

class RankTooLarge(AerofactorError, ValueError):
    """Requested factor count exceeds min(rows, columns)."""


class NonNegativityViolation(AerofactorError, AssertionError):
    """Internal assertion: a multiplicative update produced a negative."""


class IndexOutOfRange(AerofactorError, IndexError):
    """Row or column index outside the factorization result."""


# -------- multidr --------

class DegenerateVarianceWarning(UserWarning):
    """All instances are constant over time; PC1 is undefined, falling
    back to temporal means."""


class TooFewStations(AerofactorError, ValueError):
    """Embedding method needs more stations than provided."""


class BadNeighborCount(AerofactorError, ValueError):
    """n_neighbors must satisfy 2 <= n_neighbors < n."""


class KTooLarge(AerofactorError, ValueError):
    """Cluster count exceeds the number of points."""


# -------- contrastive --------

class ClusterTooSmall(AerofactorError):
    """Target or background side has fewer than two members."""


class DegenerateCovarianceWarning(UserWarning):
    """Covariances unusable for the contrast search; fell back to alpha=0."""


class SingleCluster(AerofactorError):
    """Characterization needs at least two clusters."""


# -------- service / config --------

class ConfigBounds(AerofactorError, ValueError):
    """A pipeline configuration value violates its documented bounds."""
