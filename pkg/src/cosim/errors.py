"""Exception taxonomy for the cosim package.

Every error raised on purpose derives from CosimError so callers can
catch the whole family with one except clause.
"""


class CosimError(Exception):
    """Base class for all cosim errors."""


class DimensionError(CosimError):
    """Vector or column lengths do not line up."""


class DegenerateVectorError(CosimError):
    """A vector is unusable: zero norm or non-finite components."""


class UnknownMetricError(CosimError):
    """Metric identifier is not registered."""


class EmptyPoolError(CosimError):
    """Pooling was asked to average zero vectors."""


class FormatError(CosimError):
    """A data file violates its format contract."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EncodingError(CosimError):
    """Input bytes are not valid UTF-8."""


class DuplicateIdError(CosimError):
    """The same id appears twice where ids must be unique."""


class WordNotFoundError(CosimError):
    """A surface form does not occur in its context."""


class AlignmentError(CosimError):
    """Token spans cannot be reconciled with the context text."""


class MissingEmbeddingError(CosimError):
    """No embedding is stored for a requested (pair, context) key."""


class InvalidWeightsError(CosimError):
    """Blend weights are off the simplex (negative or sum != 1)."""


class ConfigError(CosimError):
    """A configuration value is structurally invalid."""


class StandardizationError(CosimError):
    """A change column has zero variance and cannot be z-scored."""


class PipelineError(CosimError):
    """Every record in a run failed."""


class ZeroVarianceError(CosimError):
    """A correlation input is constant."""


class PairingError(CosimError):
    """Prediction and gold ids cannot be joined."""

    def __init__(self, message: str, orphans: tuple[str, ...] = ()):
        self.orphans = orphans
        super().__init__(message)


class BackendError(CosimError):
    """A remote embedding backend failed after retries."""


class ProtocolError(CosimError):
    """A remote response violates the wire protocol."""


class IoError(CosimError):
    """Writing an output stream failed."""
