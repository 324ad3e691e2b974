"""Exception types raised by the simulator."""


class ConfigError(ValueError):
    """A configuration value is missing, malformed or out of range.

    ``key`` names the offending parameter (dotted path for scenario files).
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class TopologyError(ValueError):
    pass


class GeometryError(ValueError):
    pass


class UndefinedAgeError(ValueError):
    """Raised when an age metric is requested for a ledger without deliveries."""
