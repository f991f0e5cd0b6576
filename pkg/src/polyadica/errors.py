"""Exception types shared across the package."""


class PolyadicaError(Exception):
    """Base class for all library errors."""


class InvalidInputError(PolyadicaError):
    """Malformed or mismatched input: bad relation, unknown element, wrong domain."""


class ParseError(InvalidInputError):
    """Lexical or syntax error in a text format, with 1-based position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ConsistencyError(PolyadicaError):
    """Two independently computed answers disagree.

    This always indicates a bug in the library, never bad user input; the CLI
    maps it to its own exit code so it is distinguishable from a negative result.
    """


class ResourceLimitError(PolyadicaError):
    """An enumeration exceeded its configured budget."""
