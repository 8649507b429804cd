"""Exception types raised by the simulator."""


class ConfigurationError(ValueError):
    """Inconsistent shapes, dimensions or parameters."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class DegenerateChannelError(ValueError):
    """A channel (estimate) without any usable singular value."""


class RankDeficientError(ValueError):
    """A combining matrix without full column rank."""
