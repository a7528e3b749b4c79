"""Exception hierarchy shared by the library and the CLI."""


class BNError(Exception):
    """Base class for all errors raised by :mod:`bnboot`."""


class UsageError(BNError, ValueError):
    """A caller passed arguments that violate an operation's preconditions."""


class CycleError(UsageError):
    """A directed structure contains a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle detected: " + " -> ".join(map(str, self.cycle)))


class FormatError(BNError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class InvariantError(BNError, RuntimeError):
    """An internal consistency check failed."""
