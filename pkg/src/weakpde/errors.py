"""Exception hierarchy shared by all modules."""


class WeakPDEError(Exception):
    """Base class for every error raised by this package."""


class DatasetError(WeakPDEError):
    """Problem reading or writing a dataset file.

    ``code`` identifies the failure class so callers can branch without
    parsing messages.
    """

    code = "dataset"


class BadMagicError(DatasetError):
    code = "format"


class TruncatedError(DatasetError):
    code = "truncated"


class DimensionMismatchError(DatasetError):
    code = "dimension"


class InvalidSupportError(WeakPDEError, ValueError):
    """Test-function support size outside the admissible range."""


class ConfigError(WeakPDEError):
    """Malformed configuration file or value."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class PipelineError(WeakPDEError):
    """Failure inside one stage of the discovery pipeline."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
