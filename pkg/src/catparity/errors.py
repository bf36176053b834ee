"""Exception types shared across the package.

Two families matter to callers: configuration/domain problems (bad inputs,
out-of-range parameters, requests with no solution) and numeric invariant
violations detected at run time.  The CLI maps the former to exit code 1 and
the latter to exit code 2.
"""


class ConfigError(ValueError):
    """Invalid user-supplied parameter or configuration value."""


class DegenerateProbeError(ConfigError):
    """Probe carries no signal: alpha2 = 0 with eta < 1."""


class NoSolutionError(ConfigError):
    """The requested quantity is undefined for these parameters."""


class ImpossibleOutcomeError(ConfigError):
    """Conditioning on an outcome whose probability is numerically zero."""


class PipelineOrderError(ConfigError):
    """A mode-entangled operation was applied out of order."""


class InvariantViolation(RuntimeError):
    """A numeric invariant failed during computation."""
