"""Exception types shared across the package."""


class ConfigError(Exception):
    """Raised for malformed or inconsistent run configuration."""


class StepFailure(Exception):
    """Raised when a time step violates a hard solution gate or fails to solve."""


class OracleError(Exception):
    """Raised when the exact-solution machinery cannot certify its output."""
