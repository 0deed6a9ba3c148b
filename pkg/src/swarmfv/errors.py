"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A run configuration is invalid or unsafe (bad value, CFL violation, ...)."""


class GridMismatchError(ValueError):
    """Two objects that must live on the same grid do not."""


class EmptyFieldError(ValueError):
    """An initial measure deposited no mass on the grid."""


class NumericalIntegrityError(RuntimeError):
    """A computed field violates a guarantee the algorithm is supposed to keep."""


class InternalConsistencyError(RuntimeError):
    """A stored analytic constant disagrees with a direct numerical check."""


class ResourceLimitError(RuntimeError):
    """A requested allocation exceeds the supported problem size."""
