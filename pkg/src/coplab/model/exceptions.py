"""Exception types shared by every coplab subpackage."""

from __future__ import annotations


class CopolymerLabError(Exception):
    """Base class for all errors raised by coplab."""


class DomainError(CopolymerLabError, ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""


class HorizonError(CopolymerLabError, IndexError):
    """Raised when an index exceeds the precomputed horizon of a return law."""


class CostGuardError(CopolymerLabError, RuntimeError):
    """Raised when an exhaustive computation is refused because it is too large."""


class UnsupportedModelError(DomainError):
    """Raised when a model combination is outside what an operation supports."""


class LawFormatError(CopolymerLabError, ValueError):
    """Raised when a return-law table file is malformed or not normalized."""

    def __init__(self, message: str, path: str = "", line: int | None = None) -> None:
        self.path = path
        self.line = line
        location = path
        if line is not None:
            location = f"{path}:{line}"
        super().__init__(f"{location}: {message}" if location else message)


class PreconditionError(DomainError):
    """Structured failure of a numeric precondition.

    Attributes:
        inequality: The inequality that must hold, written out as text
        lhs: Evaluated left-hand side
        rhs: Evaluated right-hand side
    """

    def __init__(self, inequality: str, lhs: float, rhs: float) -> None:
        self.inequality = inequality
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(
            f"precondition {inequality} violated (lhs={lhs:.6g}, rhs={rhs:.6g})"
        )

    def __repr__(self) -> str:
        return (
            f"PreconditionError(inequality={self.inequality!r}, "
            f"lhs={self.lhs!r}, rhs={self.rhs!r})"
        )
