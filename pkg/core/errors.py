"""
Error types raised by monolab. Every error carries a stable `code` string that
ends up in reports and CLI diagnostics.
"""
from typing import Optional


class MonolabError(ValueError):
    """Base class for all monolab errors."""

    code = "ERROR"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), **self.details}


class UnsupportedError(MonolabError):
    code = "UNSUPPORTED"


class UnsupportedNormError(UnsupportedError):
    code = "UNSUPPORTED_NORM"


class UnsupportedDimensionError(UnsupportedError):
    code = "UNSUPPORTED_DIMENSION"


class EmptyGraphError(MonolabError):
    code = "EMPTY_GRAPH"


class DegenerateError(MonolabError):
    code = "DEGENERATE"


class UnboundedError(MonolabError):
    code = "UNBOUNDED"


class SolverLimitError(MonolabError):
    code = "SOLVER_LIMIT"


class PointNotInSetError(MonolabError):
    code = "POINT_NOT_IN_SET"


class UnknownNameError(MonolabError):
    code = "UNKNOWN_NAME"


class BadParamsError(MonolabError):
    code = "BAD_PARAMS"


class DimensionMismatchError(MonolabError):
    code = "DIMENSION_MISMATCH"


class SceneError(MonolabError):
    """A scene-file problem located at a line and column (both 1-based)."""

    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int, column: int = 1, code: Optional[str] = None):
        super().__init__(f"line {line}, column {column}: {message}", line=line, column=column)
        if code:
            self.code = code
        self.line = line
        self.column = column
