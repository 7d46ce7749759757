"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LoewnerError(Exception):
    """Base class for library errors."""


class DomainError(LoewnerError, ValueError):
    """Argument outside the admissible range (times, parameters, start points)."""


class DriverParseError(DomainError):
    """Malformed driver file. Carries the 1-based line/column and character offset."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 offset: int | None = None):
        self.line = line
        self.column = column
        self.offset = offset
        where = ""
        if line is not None:
            where = f" (line {line}, column {column}, offset {offset})"
        super().__init__(message + where)


class ConditionError(LoewnerError):
    """A regularity precondition ((C1) or (C2)) does not hold for the requested operation."""


class SolverFailure(LoewnerError):
    """Branch ambiguity could not be resolved by local refinement."""

    def __init__(self, message: str, s: float | None = None, anchor: float | None = None):
        self.s = s
        self.anchor = anchor
        super().__init__(message)


class NonConvergenceError(LoewnerError):
    """Regularization ladder exhausted before the Cauchy criterion was met."""

    def __init__(self, message: str, anchor: float | None = None, gap: float | None = None):
        self.anchor = anchor
        self.gap = gap
        super().__init__(message)


class DivergentIntegralError(LoewnerError):
    """The singular integral of dβ against r^(-1/2) diverges at the given anchor."""

    def __init__(self, t0: float, detail: str = ""):
        self.t0 = t0
        msg = f"singular Stieltjes integral diverges at t0={t0:g}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DriftError(LoewnerError):
    """Incremental trace drifted away from the per-anchor solution."""

    def __init__(self, message: str, anchor: float, drift: float):
        self.anchor = anchor
        self.drift = drift
        super().__init__(message)


class NumericalFailure(LoewnerError):
    """Forward flow step size underflowed without a detected swallow."""
