"""Exception types shared across the package."""


class AuditTriageError(Exception):
    """Base class for all package-specific errors."""


class CorpusFormatError(AuditTriageError):
    """A dataset file could not be parsed into check records.

    Carries the offending row number (1-based, header excluded for CSV)
    and, when known, the record id involved.
    """

    def __init__(self, message: str, row: int | None = None, record_id: str | None = None):
        super().__init__(message)
        self.row = row
        self.record_id = record_id


class DuplicateIdError(CorpusFormatError):
    """Two rows in one dataset share the same record id."""


class MetricUndefinedError(AuditTriageError):
    """A metric's denominator is zero for the given confusion counts."""


class ModelNotFittedError(AuditTriageError):
    """A model was used for prediction before being trained."""
