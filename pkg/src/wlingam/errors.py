"""Exception types shared across the toolkit."""


class WlingamError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(WlingamError):
    """Invalid variable schema or block configuration."""


class IngestionError(WlingamError):
    """Malformed or inconsistent input data."""


class BinaryDomainViolation(IngestionError):
    """A binary variable carries a value outside {0, 1}."""


class OutOfRange(WlingamError, IndexError):
    """Time index or horizon outside the panel range."""


class MaskError(WlingamError):
    """Constraint mask is malformed or inadmissible."""


class RankDeficient(WlingamError):
    """Regression design matrix is rank deficient.

    ``columns`` names the offending regressors when they could be identified.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class MaskInfeasible(WlingamError):
    """No admissible causal ordering exists under the mask constraints."""


class DegenerateBootstrap(WlingamError):
    """Every bootstrap replicate failed to refit."""


class ArtifactError(WlingamError):
    """A serialized artifact is missing, malformed, or inconsistent."""
