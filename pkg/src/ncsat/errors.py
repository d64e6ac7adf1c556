"""Exception hierarchy shared across the simulator."""


class NcsatError(Exception):
    """Base class for all simulator errors."""


class InvalidOrderError(NcsatError, ValueError):
    pass


class RejectedConstellationError(NcsatError, ValueError):
    """Raised when a joint constellation has coinciding points."""


class InvalidGeometryError(NcsatError, ValueError):
    pass


class InvalidDirectionError(NcsatError, ValueError):
    pass


class InvalidSymbolError(NcsatError, ValueError):
    pass


class ShapeError(NcsatError, ValueError):
    pass


class ConfigError(NcsatError):
    """Base class for configuration problems (CLI exit code 2)."""


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValidationError(ConfigError):
    def __init__(self, message, fields=()):
        self.fields = tuple(fields)
        super().__init__(message)


class ResultOrderError(NcsatError, ValueError):
    """Raised when records handed to the emitter are not in sweep order."""
