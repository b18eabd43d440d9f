"""Exception types shared across the toolkit."""


class HolodetError(Exception):
    """Base class for all toolkit errors."""


class InvalidBoxError(HolodetError):
    """Raised when box parameters are non-finite, non-positive, or non-canonical."""


class ConfigError(HolodetError):
    """Raised for invalid configuration values or incompatible settings."""


class ParseError(HolodetError):
    """Malformed input file; carries the offending location.

    Formats as ``path:line:column: message`` so shells and editors can jump
    to the problem.
    """

    def __init__(self, path, line, column, message):
        self.path = path
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{path}:{line}:{column}: {message}")
