"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the support or parameter range of a function."""


class ConfigurationError(ValueError):
    """A scenario, estimator or parameter space is inconsistently specified."""


class UnsupportedFamilyError(ConfigurationError):
    """The requested operation is not defined for the given family."""
