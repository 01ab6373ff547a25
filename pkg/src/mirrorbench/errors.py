"""Exception hierarchy shared by every subpackage."""


class MirrorBenchError(Exception):
    """Base class for all errors raised by mirrorbench."""


class GameError(MirrorBenchError):
    """A game tree violates a structural invariant."""


class ConfigurationError(MirrorBenchError, ValueError):
    """Bad user-supplied configuration (missing keys, wrong ranges, ...)."""


class DomainError(MirrorBenchError, ValueError):
    """A convex-family evaluator was called outside its domain."""

    def __init__(self, family, argument, message=None):
        self.family = family
        self.argument = argument
        super().__init__(message or f"{family!r}: argument {argument!r} outside the domain")


class SolverError(MirrorBenchError, ArithmeticError):
    """The dual-variable solver failed to reach the requested residual."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class GameFileError(MirrorBenchError, ValueError):
    """Syntax or validation error in a plain-text game file."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
