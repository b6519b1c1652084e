"""Shared exception types."""


class ConfigError(ValueError):
    """A scenario, topology, or CLI input failed validation."""


class UnstableSystemError(ValueError):
    """Offered load meets or exceeds service capacity (rho >= 1)."""
