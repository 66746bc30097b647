"""Exception hierarchy shared by every loopwatch module."""

from __future__ import annotations


class LoopwatchError(Exception):
    """Base class for all errors raised by loopwatch."""


class NetworkError(LoopwatchError, ValueError):
    """A network violates one of its structural invariants."""


class ParseError(NetworkError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedError(NetworkError):
    def __init__(self, message: str, vertices: tuple[str, ...] = ()):
        self.vertices = tuple(vertices)
        if vertices:
            message = f"{message}: {', '.join(vertices)}"
        super().__init__(message)


class NumericOverflowError(LoopwatchError, OverflowError):
    """Raised when z**w would leave the double range."""


class TermBudgetExceeded(LoopwatchError):
    """A symbolic matrix power grew past the configured term budget."""


class OracleLimitError(LoopwatchError, ValueError):
    pass


class UsageError(LoopwatchError, ValueError):
    pass


class MinimizationError(LoopwatchError):
    pass
