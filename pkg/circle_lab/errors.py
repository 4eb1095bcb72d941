"""
Exception hierarchy for circle-lab.

Every error carries the process exit code the CLI reports for it and a
context dict that is attached to structured log records.
"""
from typing import Any, Dict, Optional


class CircleLabError(Exception):
    """Base class for all laboratory errors."""

    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "context": self.context,
        }


class PreconditionError(CircleLabError, ValueError):
    """An operation was called outside its stated preconditions."""

    exit_code = 2


class DimensionMismatch(PreconditionError):
    pass


class InvalidRange(PreconditionError):
    pass


class UnsupportedFamily(PreconditionError):
    pass


class LevelOutOfRange(PreconditionError):
    """Dyadic level or shift outside the mollifier family's range."""


class RangeExceeded(PreconditionError):
    pass


class RangeViolation(PreconditionError):
    """Parameter below the validity floor of the estimate being fitted."""


class NotMajorArc(PreconditionError):
    pass


class GridMismatch(PreconditionError):
    pass


class MissingPieces(PreconditionError):
    pass


class OverflowRisk(PreconditionError):
    """Integer evaluation would leave the signed 64-bit safe range."""


class TableFormatError(PreconditionError):
    """A stored Fourier table cannot be read by this version."""


class BudgetExceeded(CircleLabError):
    """Requested work exceeds the configured grid or operation budget."""

    exit_code = 3


class QuadratureFailure(CircleLabError):
    pass


class ToleranceCheckFailure(CircleLabError):
    """An identity or exact inequality failed its numeric tolerance."""


def check_budget(required: int, budget: int, what: str) -> None:
    """Raise BudgetExceeded when ``required`` work exceeds ``budget``."""
    if required > budget:
        raise BudgetExceeded(
            f"{what} needs {required} but the budget is {budget}",
            context={"required": int(required), "budget": int(budget), "what": what},
        )
