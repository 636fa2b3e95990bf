"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A parameter, state, or config value violates its contract."""


class ConfigError(ValidationError):
    """A config file could not be parsed or validated."""


class SolverError(RuntimeError):
    """A linear solve or time integration failed or produced an unusable result."""


class SingularSystemError(SolverError):
    """A linear system that should be regular is singular at this parameter point."""
