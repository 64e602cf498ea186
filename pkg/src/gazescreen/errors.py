"""Exception hierarchy shared by every gazescreen module."""


class GazeScreenError(Exception):
    """Base class for all data/runtime failures raised by the toolkit."""


class IoFailure(GazeScreenError, OSError):
    pass


class MalformedHeader(GazeScreenError):
    pass


class MalformedRow(GazeScreenError):
    def __init__(self, row, message=""):
        self.row = row
        super().__init__(f"malformed row {row}" + (f": {message}" if message else ""))


class NonMonotonicTime(GazeScreenError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"non-increasing timestamp at row {row}")


class SchemaViolation(GazeScreenError):
    pass


class RowSumViolation(SchemaViolation):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row}: fractions sum to {total!r}, expected 1")


class InsufficientData(GazeScreenError):
    pass


class ZeroTimestep(GazeScreenError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"zero time step between valid samples at index {index}")


class EmptyRecording(GazeScreenError):
    pass


class EmptyInput(GazeScreenError):
    pass


class DegenerateProfile(GazeScreenError):
    pass


class EmptyBatch(GazeScreenError):
    pass


class NonFiniteInput(GazeScreenError):
    pass


class DivergedLoss(GazeScreenError):
    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"non-finite loss at epoch {epoch}")


class InsufficientClassMembers(GazeScreenError):
    pass


class StageFailure(GazeScreenError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage: str, detail: str):
        self.stage = stage
        super().__init__(f"{stage}: {detail}")
