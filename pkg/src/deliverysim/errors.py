"""Exception hierarchy shared by all modules."""


class DeliverySimError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DeliverySimError):
    """Invalid configuration or sweep setup."""


class SchemaError(ConfigError):
    """A scenario document has a malformed or missing field."""


class BoundsError(ConfigError):
    """A coordinate lies outside the grid."""


class EmptyMap(DeliverySimError):
    pass


class UnknownLabel(DeliverySimError, KeyError):
    pass


class NegativeWeight(DeliverySimError, ValueError):
    pass


class NoPath(DeliverySimError):
    pass


class NotGridPath(DeliverySimError):
    pass


class AsymmetricArc(DeliverySimError):
    pass


class InvalidCode(DeliverySimError, ValueError):
    pass


class BadIndex(DeliverySimError, IndexError):
    pass


class Degenerate(DeliverySimError, ValueError):
    """Layer geometry produces an output smaller than one pixel."""


class BadBinCount(DeliverySimError, ValueError):
    pass


class EmptyLog(DeliverySimError, ValueError):
    pass


class BlockedCell(DeliverySimError):
    """The robot tried to enter a cell that is actually occupied."""

    def __init__(self, cell):
        super().__init__(f"collision at {cell}")
        self.cell = cell
