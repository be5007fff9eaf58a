"""Exception hierarchy shared by all modules."""


class CirculawError(Exception):
    """Base class for all library errors."""


class ConfigError(CirculawError):
    """Invalid ensemble or experiment configuration."""


class UsageError(CirculawError):
    """API misuse, e.g. shifting a matrix twice."""


class DomainError(CirculawError):
    """Argument outside the mathematical domain of an operation."""


class NumericError(CirculawError):
    """A numerical routine failed to reach its accuracy contract."""


class EstimationError(CirculawError):
    """A Monte Carlo estimate could not be formed (e.g. every trial filtered out)."""
