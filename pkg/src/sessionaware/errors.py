"""Exception types shared across the package."""


class SessionAwareError(Exception):
    """Base class for user-facing errors (bad data, bad configuration)."""


class DataError(SessionAwareError):
    """Raised when input data is missing, malformed or empty."""


class ConfigError(SessionAwareError):
    """Raised for invalid or inconsistent configuration."""
