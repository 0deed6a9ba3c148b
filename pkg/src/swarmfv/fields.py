"""Cell-averaged density and velocity fields attached to a grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, NumericalIntegrityError
from .mesh import Grid


@dataclass(frozen=True)
class DensityField:
    """Cell averages of a nonnegative density.

    ``values[J]`` is the average over cell ``J``; the mass carried by the cell
    is ``values[J]`` times the quadrature weight (the cell volume under the
    default convention).  Construction only checks the shape; call
    ``validate`` where nonnegativity and finiteness must actually hold, since
    parts of the test surface intentionally produce out-of-contract fields.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "values", values)

    def validate(self, context: str = "density field") -> None:
        """Raise NumericalIntegrityError unless values are finite and nonnegative."""
        if not np.all(np.isfinite(self.values)):
            raise NumericalIntegrityError(f"{context}: non-finite values present")
        if np.any(self.values < 0.0):
            raise NumericalIntegrityError(
                f"{context}: negative values present (min {self.values.min()})"
            )

    def mass(self, weight: float | None = None) -> float:
        """Total mass under the given quadrature weight (cell volume if None)."""
        if weight is None:
            weight = self.grid.cell_volume
        return float(self.values.sum()) * weight

    @classmethod
    def zeros(cls, grid: Grid) -> "DensityField":
        return cls(grid, np.zeros(grid.shape))


@dataclass(frozen=True)
class VelocityField:
    """Cell-centered velocity; ``components[i]`` is the speed along axis ``i``."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self) -> None:
        components = np.ascontiguousarray(self.components, dtype=float)
        expected = (self.grid.dimension, *self.grid.shape)
        if components.shape != expected:
            raise ValueError(
                f"components shape {components.shape} does not match expected {expected}"
            )
        object.__setattr__(self, "components", components)

    def max_speed(self) -> float:
        """Largest componentwise speed over the grid."""
        return float(np.max(np.abs(self.components)))


def require_same_grid(grid: Grid, *objects) -> None:
    """Raise GridMismatchError unless every object lives on ``grid``."""
    for obj in objects:
        if obj.grid != grid:
            raise GridMismatchError(
                f"{type(obj).__name__} on grid {obj.grid} does not match expected grid {grid}"
            )
