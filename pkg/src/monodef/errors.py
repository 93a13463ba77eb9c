"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MonodefError(Exception):
    """Base class; carries an optional machine-readable witness."""

    exit_code = 1

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class CycleDetected(MonodefError):
    exit_code = 2


class NotAPartialOrder(MonodefError):
    exit_code = 2


class UnknownElement(MonodefError):
    exit_code = 2


class NotASubstructure(MonodefError):
    exit_code = 2


class BudgetExceeded(MonodefError):
    exit_code = 3


class PreconditionFailed(MonodefError):
    pass


class Disagreement(MonodefError):
    pass


class TableViolation(MonodefError):
    pass


class NotFound(MonodefError):
    pass


class AllocationMismatch(MonodefError):
    exit_code = 2


class SparePoolExhausted(BudgetExceeded):
    pass


class DepthExceeded(BudgetExceeded):
    pass


class UnboundVariable(MonodefError):
    exit_code = 2


class NotAFunctionGraph(MonodefError):
    pass


class NotMonotone(MonodefError):
    exit_code = 2


class FormulaSyntaxError(MonodefError):
    exit_code = 2


class BadInput(MonodefError):
    """Malformed JSON document or CLI argument."""

    exit_code = 2
