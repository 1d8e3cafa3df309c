"""Exception hierarchy shared by every module of the package."""


class JointParseError(Exception):
    """Base class for all errors raised by jointparse."""


class DataError(JointParseError):
    """Problem with user-supplied data (treebanks, embeddings, model files)."""


class TransitionError(JointParseError):
    """An action was applied where its transition condition does not hold."""

    def __init__(self, message, step=None, condition=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step
        self.condition = condition


class NoPendingDecision(TransitionError):
    """Raised when a classifier is requested for a terminal configuration."""


class NonProjectiveError(DataError):
    """The gold tree cannot be derived by the arc-standard system."""


class IncompleteAnnotationError(DataError):
    """Gold tags, heads or labels are missing where they are required."""


class ConllFormatError(DataError):
    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


class EmbeddingFormatError(DataError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class AlignmentError(DataError):
    """Gold and predicted corpora do not describe the same sentences."""


class ModelFormatError(DataError):
    """Base class for unreadable model files."""


class CorruptModelError(ModelFormatError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class DimensionError(JointParseError, ValueError):
    """Operand shapes do not agree."""
