"""Exception hierarchy.

Every exception carries an optional ``diagnostics`` mapping so that the CLI can
emit a structured error record without parsing messages.
"""

from __future__ import annotations

from typing import Any


class HillError(Exception):
    """Base class for all errors raised by the package."""

    def __init__(self, message: str, **diagnostics: Any):
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


class PotentialError(HillError, ValueError):
    """Malformed or invalid potential description."""


class WrongKind(HillError, TypeError):
    pass


class StepLimitExceeded(HillError):
    pass


class NonFiniteState(HillError, FloatingPointError):
    pass


class DirichletSingularity(HillError, ZeroDivisionError):
    """Raised when ``s(1; z)`` is numerically zero, so ``z`` is a pole candidate."""


class BracketFailure(HillError):
    pass


class InvariantViolation(HillError):
    pass


class InconsistentClassification(HillError):
    pass


class EvaluationFailure(HillError):
    pass


class UnstableResidue(HillError):
    pass


class TruncationUnconverged(HillError):
    pass


class MeshTooCoarse(HillError):
    pass
