"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


class DisconnectedTopologyError(ValueError):
    """Transmission range too short for the requested node spacing."""


class NoRouteError(ValueError):
    """A flow's destination is unreachable from its source."""


class NumericCorruptionError(RuntimeError):
    """A probability vector lost its simplex structure beyond repair."""


class JointSpaceTooLargeError(ValueError):
    """Exhaustive joint-assignment enumeration refused: space too big."""
