"""Exception taxonomy shared by every module."""


class DrxpError(Exception):
    """Base class for all package errors."""


class DomainViolation(DrxpError):
    """A point (or coordinate) falls outside the declared feature domains."""


class PredictionMismatch(DrxpError):
    """Instance label disagrees with the classifier's prediction.

    Carries the actual predicted label in ``predicted``.
    """

    def __init__(self, predicted):
        super().__init__(f"classifier predicts {predicted!r}, not the instance label")
        self.predicted = predicted


class SchemaViolation(DrxpError):
    """Model document malformed or violating the file schema."""


class Unsupported(DrxpError):
    """Query outside an oracle's capabilities (e.g. continuous free features
    on the grid oracle, categorical features under a numeric norm)."""


class CombinatorialLimit(DrxpError):
    """Candidate-point count exceeds the grid oracle's configured cap."""


class OracleFailure(DrxpError):
    """External process crash, protocol violation, timeout, or witness that
    fails local re-verification."""


class OracleInconsistency(DrxpError):
    """Completed probe pattern violates monotonicity (not a step function)."""


class NoExplanation(DrxpError):
    """Requested kind of explanation does not exist (e.g. contrastive
    explanation of an epsilon-robust instance)."""


class IncompleteFamily(DrxpError):
    """Duality check requested on families not enumerated to completion."""


class SeedEngineOverflow(DrxpError):
    """Enumeration blocking-constraint store exceeded its configured cap."""
