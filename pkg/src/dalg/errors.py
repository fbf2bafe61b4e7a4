"""Exception hierarchy shared by all engine layers."""


class DalgError(Exception):
    """Base class for every error raised by the engine."""


class ContextMismatchError(DalgError):
    """Operands live in different ring contexts."""


class DomainError(DalgError, ValueError):
    """An operation was applied outside its mathematical domain."""


class PreconditionError(DalgError, ValueError):
    """A documented precondition of an operation does not hold."""


class ComputationTimeout(DalgError):
    """A resource cap (wall time or reduction steps) was exceeded.

    ``stats`` carries whatever partial statistics the computation had
    gathered when it was interrupted.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


class PartialResultError(DalgError):
    """An iterative method gave up before finding a nonzero result."""

    def __init__(self, message, last_level=None, stats=None):
        super().__init__(message)
        self.last_level = last_level
        self.stats = dict(stats or {})


class ParseError(DalgError, ValueError):
    """Syntax or name-resolution error in ADE source text."""

    def __init__(self, message, line=1, column=None):
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message} ({where})")
        self.line = line
        self.column = column
