"""Adaptive-divergence free-space optical links for high-speed trains."""

__version__ = "0.1.0"

from hstfso.errors import ConfigError, DomainError

__all__ = ["ConfigError", "DomainError", "__version__"]
