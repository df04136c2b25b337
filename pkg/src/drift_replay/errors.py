"""Exception hierarchy shared by every subpackage."""


class DriftReplayError(Exception):
    """Base class for all library errors."""


class IdOutOfRange(DriftReplayError, IndexError):
    pass


class InvalidTarget(DriftReplayError, ValueError):
    pass


class EmptyBatch(DriftReplayError, ValueError):
    pass


class EmptyDataset(DriftReplayError, ValueError):
    pass


class ShapeMismatch(DriftReplayError, ValueError):
    pass


class InvalidArch(DriftReplayError, ValueError):
    pass


class InvalidConfig(DriftReplayError, ValueError):
    pass


class NotInBatch(DriftReplayError, ValueError):
    pass


class KTooLarge(DriftReplayError, ValueError):
    pass


class EmptyIncrement(DriftReplayError, ValueError):
    pass


class CapacityExceeded(DriftReplayError, ValueError):
    pass


class InvalidRating(DriftReplayError, ValueError):
    pass


class HeaderMismatch(DriftReplayError, ValueError):
    pass


class MalformedInput(DriftReplayError, ValueError):
    pass


class TooFewRecords(DriftReplayError, ValueError):
    pass


class UndefinedAUC(DriftReplayError, ValueError):
    pass


class SchemeUnavailable(DriftReplayError, ValueError):
    pass


class ScoringError(DriftReplayError):
    """Raised by batch scoring; carries the offending sample index."""

    def __init__(self, index, cause):
        super().__init__(f"scoring failed at sample {index}: {cause}")
        self.index = index
        self.cause = cause


class StageFailure(DriftReplayError):
    """A module error raised inside one protocol stage; ``cause`` keeps the original."""

    def __init__(self, seed, stage, cause):
        super().__init__(f"seed {seed}, stage {stage}: {type(cause).__name__}: {cause}")
        self.seed = seed
        self.stage = stage
        self.cause = cause
