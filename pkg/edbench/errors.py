"""
Exception hierarchy shared by every edbench stage.

Each error also derives from the builtin it refines so code written against
``ValueError`` / ``RuntimeError`` keeps working.
"""


class EdbenchError(Exception):
    """Base class for all edbench errors."""


class ConfigError(EdbenchError, ValueError):
    """Invalid or inconsistent configuration."""


class SchemaError(EdbenchError, ValueError):
    """A source table header does not match its documented schema."""

    def __init__(self, column: str, kind: str = None):
        self.column = column
        self.kind = kind
        where = f" in table '{kind}'" if kind else ""
        super().__init__(f"missing required column{where}: {column}")


class RowError(EdbenchError, ValueError):
    """A single source row could not be parsed."""

    def __init__(self, row: int, message: str):
        self.row = row
        self.message = message
        super().__init__(f"row {row}: {message}")


class WaveformFormatError(EdbenchError, ValueError):
    """A stored waveform does not have 12 leads of 10 s each."""


class InvalidCodeError(EdbenchError, ValueError):
    """An ICD code is malformed for the requested operation."""


class EmptyCohortError(EdbenchError, ValueError):
    """No samples survived cohort selection."""

    def __init__(self, message: str = "empty cohort"):
        super().__init__(message)


class DataError(EdbenchError, ValueError):
    """Source data violates a cross-table consistency rule."""


class AssemblyError(EdbenchError, ValueError):
    """Feature registry and computed features disagree."""


class ImputerError(EdbenchError, ValueError):
    """Imputer applied to a matrix with different columns."""


class ShapeError(EdbenchError, ValueError):
    """Tensor or array has an unexpected shape."""


class UndefinedMetricError(EdbenchError, ValueError):
    """A metric is undefined for the given labels (e.g. single-class AUROC)."""


class TrainingDivergenceError(EdbenchError, RuntimeError):
    """Training produced a non-finite loss."""


class CheckpointMismatchError(EdbenchError, ValueError):
    """Checkpoint hashes do not match the data it is asked to score."""


class CategoryIndexError(EdbenchError, IndexError):
    """A categorical index lies outside its embedding table."""
