from typing import Any, Dict, Optional


class IClustError(Exception):
    """Base class for every failure raised by the library."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = {k: v for k, v in context.items() if v is not None}

    def to_record(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.context}


class DataError(IClustError):
    """Unreadable, ragged, empty or non-finite input."""

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message, path=path, row=row, column=column)
        self.path = path
        self.row = row
        self.column = column


class SamplingError(IClustError):
    pass


class NeighborhoodError(IClustError):
    pass


class PartitionError(IClustError):
    pass


class EvaluationError(IClustError):
    pass


class BenchError(IClustError):
    pass
