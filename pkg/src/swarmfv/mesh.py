"""Uniform Cartesian grids in one and two dimensions.

Cells are half-open boxes: cell ``J`` along axis ``i`` covers
``[origin_i + J_i*step_i, origin_i + (J_i+1)*step_i)``, so every point of the
domain belongs to exactly one cell.  Cell-averaged fields are stored as numpy
arrays of shape ``grid.shape``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform grid described by its lower corner, cell counts and cell steps.

    Parameters
    ----------
    origin:
        Coordinates of the lower corner of the domain, one entry per axis.
    cells:
        Number of cells along each axis, at least 1.
    steps:
        Cell width along each axis, strictly positive.
    """

    origin: tuple[float, ...]
    cells: tuple[int, ...]
    steps: tuple[float, ...]

    def __post_init__(self) -> None:
        origin = tuple(float(x) for x in self.origin)
        cells = tuple(int(n) for n in self.cells)
        steps = tuple(float(h) for h in self.steps)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "steps", steps)
        d = len(cells)
        if d not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got dimension {d}")
        if len(origin) != d or len(steps) != d:
            raise ValueError(
                f"inconsistent axis counts: origin has {len(origin)}, "
                f"cells has {d}, steps has {len(steps)}"
            )
        if any(n < 1 for n in cells):
            raise ValueError(f"need at least one cell per axis, got {cells}")
        if any(not np.isfinite(h) or h <= 0.0 for h in steps):
            raise ValueError(f"cell steps must be positive and finite, got {steps}")
        if any(not np.isfinite(x) for x in origin):
            raise ValueError(f"origin must be finite, got {origin}")

    @classmethod
    def from_extent(
        cls, origin: tuple[float, ...], extent: tuple[float, ...], cells: tuple[int, ...]
    ) -> "Grid":
        """Build a grid covering ``[origin, origin+extent)`` with the given cell counts."""
        if len(extent) != len(cells):
            raise ValueError("extent and cells must have the same length")
        if any(e <= 0 for e in extent):
            raise ValueError(f"extent must be positive, got {extent}")
        steps = tuple(float(e) / int(n) for e, n in zip(extent, cells))
        return cls(origin=tuple(origin), cells=tuple(cells), steps=steps)

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of a cell-averaged field on this grid."""
        return self.cells

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        """Measure of a single cell, the product of the steps."""
        vol = 1.0
        for h in self.steps:
            vol *= h
        return vol

    @property
    def upper(self) -> tuple[float, ...]:
        """Coordinates of the upper corner of the domain."""
        return tuple(o + n * h for o, n, h in zip(self.origin, self.cells, self.steps))

    def cell_center(self, index: int | tuple[int, ...]) -> np.ndarray:
        """Center of cell ``index``, as an array of shape ``(dimension,)``."""
        if isinstance(index, (int, np.integer)):
            index = (int(index),)
        if len(index) != self.dimension:
            raise IndexError(f"cell index {index} has wrong dimension for {self.dimension}D grid")
        for j, n in zip(index, self.cells):
            if not 0 <= int(j) < n:
                raise IndexError(f"cell index {index} out of range for grid with cells {self.cells}")
        return np.array(
            [o + (int(j) + 0.5) * h for o, j, h in zip(self.origin, index, self.steps)]
        )

    def axis_centers(self, axis: int) -> np.ndarray:
        """All cell-center coordinates along one axis."""
        n = self.cells[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.steps[axis]

    def center_mesh(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinates as sparse arrays broadcastable to ``shape``."""
        axes = [self.axis_centers(i) for i in range(self.dimension)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))

    def containing_cell(self, point) -> tuple[int, ...] | None:
        """Index of the half-open cell containing ``point``, or None if outside."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.dimension,):
            raise ValueError(f"point {point} has wrong dimension for {self.dimension}D grid")
        index = []
        for x, o, n, h in zip(point, self.origin, self.cells, self.steps):
            j = int(np.floor((x - o) / h))
            if not 0 <= j < n:
                return None
            index.append(j)
        return tuple(index)
