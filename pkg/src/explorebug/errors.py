class ExploreBugError(Exception):
    pass


class InvalidArgument(ExploreBugError, ValueError):
    pass


class InvalidState(ExploreBugError, RuntimeError):
    pass


class NoFrontier(ExploreBugError):
    """Raised when an allocation is requested over an empty candidate list."""


class PathNotFound(ExploreBugError):
    pass


class GenerationInfeasible(ExploreBugError):
    pass


class ConfigError(ExploreBugError, ValueError):
    """Malformed scenario configuration. ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
