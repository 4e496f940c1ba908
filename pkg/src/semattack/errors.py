"""Exception types shared across the toolkit."""


class SemattackError(Exception):
    """Base class for all toolkit errors."""


class LoadError(SemattackError):
    """A data file (lexicon, embeddings, corpus) could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TrainingError(SemattackError):
    """Training preconditions were violated."""


class CheckpointError(SemattackError):
    """A model checkpoint is missing, corrupt, or from an unknown format version."""


class ScorerError(SemattackError):
    """Base class for plausibility-scorer failures."""


class ScorerTransportError(ScorerError):
    """The remote scorer was unreachable or returned a non-protocol status."""


class ScorerProtocolError(ScorerError):
    """The remote scorer answered, but the exchange violated the wire protocol."""


class AttackError(SemattackError):
    """A single-document attack could not be completed."""
