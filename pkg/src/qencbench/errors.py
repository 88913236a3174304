"""Exception hierarchy."""


class QencError(Exception):
    """Base class for all package errors."""


class ArgumentError(QencError, ValueError):
    """Invalid argument: bad shape, out-of-range index, violated precondition."""


class EncodingError(QencError):
    """A data row cannot be encoded (e.g. zero vector for amplitude encoding)."""


class TrainingError(QencError):
    """SVC training failed (single class, no convergence)."""


class MetricError(QencError):
    """A metric is undefined for the given inputs."""


class IngestionError(QencError):
    """Dataset file is malformed."""


class BaselineImportError(QencError):
    """External baseline metrics file is malformed or mismatched."""


class RefusalError(QencError):
    """Request is valid but too large for the chosen method."""


class StageError(QencError):
    """Benchmark stage failure, tagged with the stage that raised."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
