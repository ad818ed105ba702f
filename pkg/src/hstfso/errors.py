class DomainError(ValueError):
    """An input lies outside the domain where a link equation is defined."""


class ConfigError(ValueError):
    """A configuration value violates one of its invariants."""
