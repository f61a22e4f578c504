"""Exception hierarchy shared by all conekit modules.

Exit-code buckets used by the CLI: input problems (2), data degeneracies
that the caller must repair (3), numerical failures (4).
"""


class ConeKitError(Exception):
    """Base class for all conekit errors."""


class DimensionError(ConeKitError):
    """Shapes or sizes are incompatible (e.g. K > n, empty input)."""


class DataError(ConeKitError):
    """Input values are malformed (non-finite entries, bad file contents)."""


class ConfigError(ConeKitError):
    """A run configuration file failed validation."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class ConvergenceError(ConeKitError):
    """An iterative solver hit its iteration cap.

    Carries the residual / duality gap achieved at the cap.
    """

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class RankError(ConeKitError):
    """A matrix that must be full rank (or well conditioned) is not."""


class DegenerateRowError(ConeKitError):
    """Rows that must be nonzero are (numerically) zero."""

    def __init__(self, indices, what="row"):
        self.indices = list(indices)
        super().__init__(
            f"{len(self.indices)} zero {what}(s) at indices {self.indices[:20]}"
            + ("..." if len(self.indices) > 20 else "")
        )


class DegenerateNodeError(DegenerateRowError):
    """Isolated nodes present; the caller must remove them first."""

    def __init__(self, indices):
        super().__init__(indices, what="node")


class DegenerateWordError(DegenerateRowError):
    """Words that never occur; the caller must remove them first."""

    def __init__(self, indices):
        super().__init__(indices, what="word")


class ConeConditionError(ConeKitError):
    """The corner gram fails the positive-combination condition."""

    def __init__(self, coordinates):
        self.coordinates = list(coordinates)
        super().__init__(
            "corner condition violated: non-positive coordinates at "
            f"{self.coordinates}"
        )


class InsufficientBandError(ConeKitError):
    """The hyperplane band holds fewer points than requested clusters."""


class ClusterDegeneracyError(ConeKitError):
    """Clustering produced an empty cluster."""


class NoConeStructureError(ConeKitError):
    """The adaptive band search exhausted its schedule without success."""


class OutOfConeError(ConeKitError):
    """A row cannot be written as a non-negative corner combination."""


class ScaleError(ConeKitError):
    """A generated edge probability left [0, 1]."""


class SpectrumInconsistencyError(ConeKitError):
    """A quantity that must be non-negative at the population level is
    too negative to be numerical noise."""


class UndefinedCorrelationError(ConeKitError):
    """Rank correlation requested on a constant column."""


class TooFewWordsError(ConeKitError):
    """Vocabulary too small for the requested number of topics."""
