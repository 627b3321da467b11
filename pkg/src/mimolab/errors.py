"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """An iterative numeric procedure failed (non-convergence, divergence, non-finite values)."""


class ConfigError(ValueError):
    """An experiment configuration file or CLI argument set is invalid."""


class DegenerateChannelError(ValueError):
    """A channel realization is unusable (all-zero or numerically singular)."""
