"""Exception types shared across the package."""


class PricePumpError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PricePumpError):
    """A configuration field is missing, malformed, or out of range."""


class DegenerateMarket(PricePumpError):
    """All active stock positions have effectively vanished; no price can clear."""


class SaturatedHazard(PricePumpError):
    """Exposure proportion is at (or within rounding of) 1: certain crash."""


class EmptySeries(PricePumpError):
    """An input series is too short for the requested computation."""


class InsufficientData(PricePumpError):
    """Not enough observations remain after burn-in to form an estimate."""


class DegenerateRegressor(PricePumpError):
    """Regression input has no variance in the explanatory variable."""


class LengthMismatch(PricePumpError):
    """Two series that must align elementwise have different lengths."""
