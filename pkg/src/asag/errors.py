"""Exception hierarchy shared across the package.

Every error the library raises deliberately derives from :class:`AsagError`
so callers (CLI, service) can separate domain failures from bugs.
"""


class AsagError(Exception):
    """Base class for all deliberate library errors."""


class ParseError(AsagError):
    """A corpus file tree or file could not be parsed; message names the path."""


class AlignmentError(ParseError):
    """Student answers and score lines disagree in count for a question."""


class LabelError(ParseError):
    """An answer carries an unknown accuracy label."""


class CsvFormatError(AsagError):
    """A pairs CSV violates the required schema; message carries row context."""


class ScoreRangeError(AsagError):
    """A score lies outside [0, score_max]."""


class StratificationError(AsagError):
    """A question has fewer answers than the number of split parts."""


class DegenerateInputError(AsagError):
    """A text input is empty after tokenization."""


class UndefinedMetricError(AsagError):
    """A metric is undefined for the given inputs (e.g. zero variance)."""


class LookupMissError(AsagError):
    """An embedding key is absent from a file-backed provider."""


class BackendError(AsagError):
    """An external embedding backend failed or answered with a bad status."""


class EmbeddingFormatError(AsagError):
    """An embedding file violates its declared header or record format."""


class NumericError(AsagError):
    """A training step produced non-finite values."""


class ControllerError(AsagError):
    """Every training attempt failed numerically."""


class CheckpointError(AsagError):
    """A checkpoint file is malformed or its shapes do not chain."""
