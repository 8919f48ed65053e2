"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
property-check failures exit 2, numerical divergence exits 3.
"""


class FvpoptError(Exception):
    """Base class for all package errors."""


class UsageError(FvpoptError, ValueError):
    """An operation was called with arguments violating its contract."""


class DimensionMismatchError(UsageError):
    """Two vectors of different dimensions were combined."""


class ConfigError(FvpoptError, ValueError):
    """An experiment configuration is invalid or inconsistent."""


class AdmissibilityError(ConfigError):
    """An algorithm parameter lies outside its admissible interval."""


class DegenerateOracleError(UsageError):
    """A subgradient oracle returned zero at an infeasible point."""


class DivergenceError(FvpoptError, RuntimeError):
    """An iterate left the finite range the theory guarantees."""

    def __init__(self, message, n=None, x=None):
        super().__init__(message)
        self.n = n
        self.x = x
