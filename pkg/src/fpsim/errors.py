"""Exception hierarchy shared by the library and the CLI."""


class FpsimError(Exception):
    """Base class for all fpsim errors."""

    exit_code = 1


class InvalidParameterError(FpsimError, ValueError):
    """A numeric or enum parameter is outside its allowed range."""


class InvalidInputError(FpsimError, ValueError):
    """Input data is empty or has mismatched dimensions."""


class DomainError(FpsimError, ValueError):
    """A distribution violates a support requirement."""


class UnsupportedSizeError(FpsimError, ValueError):
    """A problem size exceeds what an exhaustive search supports."""


class ConsistencyError(FpsimError, RuntimeError):
    """Internal data structures disagree with each other."""


class InsufficientDataError(FpsimError, RuntimeError):
    """Not enough usable points to fit an estimate."""


class ConfigError(FpsimError, ValueError):
    """Invalid experiment configuration."""

    exit_code = 2

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class TraceParseError(FpsimError, ValueError):
    """Malformed row in a trace or CSV input file."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where = f"{where}{line}: " if where else f"line {line}: "
        elif where:
            where = f"{where} "
        super().__init__(f"{where}{message}")


class DuplicateKeyError(TraceParseError):
    """The same (location, AP, sample) key appears twice in a trace."""
