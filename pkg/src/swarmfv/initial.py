"""Discretization of initial measures into cell-averaged densities.

Point masses are deposited into the containing cell; extended shapes are
rasterized with a cell-center membership test and their requested mass is
spread evenly over the captured cells, so each component carries exactly its
nominal mass on every grid that captures it at all.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFieldError
from .fields import DensityField
from .mesh import Grid

KINDS = ("dirac", "uniform_ball", "uniform_box", "sum")


@dataclass(frozen=True)
class InitialMeasure:
    """A finite nonnegative measure to be discretized onto a grid.

    Exactly the parameters relevant to ``kind`` must be set:

    ``dirac``
        ``location`` and ``mass``.
    ``uniform_ball``
        ``center``, ``radius`` and ``mass``.
    ``uniform_box``
        ``lower``, ``upper`` and ``mass``.
    ``sum``
        ``components``; the total mass is the sum of the component masses.

    With ``normalize`` the discretized field is rescaled to total mass one
    (volume-weighted quadrature).
    """

    kind: str
    mass: float = 1.0
    location: tuple[float, ...] | None = None
    center: tuple[float, ...] | None = None
    radius: float | None = None
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None
    components: tuple["InitialMeasure", ...] = field(default=())
    normalize: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}, expected one of {KINDS}")
        if self.kind != "sum":
            if not np.isfinite(self.mass) or self.mass < 0.0:
                raise ValueError(f"mass must be finite and nonnegative, got {self.mass}")
        if self.kind == "dirac" and self.location is None:
            raise ValueError("dirac measure needs a location")
        if self.kind == "uniform_ball":
            if self.center is None or self.radius is None:
                raise ValueError("uniform_ball measure needs a center and a radius")
            if not np.isfinite(self.radius) or self.radius <= 0.0:
                raise ValueError(f"radius must be positive and finite, got {self.radius}")
        if self.kind == "uniform_box":
            if self.lower is None or self.upper is None:
                raise ValueError("uniform_box measure needs lower and upper corners")
            if len(self.lower) != len(self.upper):
                raise ValueError("box corners must have the same dimension")
            if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
                raise ValueError(
                    f"box corners must satisfy lower < upper per axis, "
                    f"got {self.lower} and {self.upper}"
                )
        if self.kind == "sum":
            if not self.components:
                raise ValueError("sum measure needs at least one component")
            object.__setattr__(self, "components", tuple(self.components))


def dirac(location, mass: float = 1.0, normalize: bool = False) -> InitialMeasure:
    return InitialMeasure("dirac", mass=mass, location=tuple(location), normalize=normalize)


def uniform_ball(center, radius: float, mass: float = 1.0, normalize: bool = False) -> InitialMeasure:
    return InitialMeasure(
        "uniform_ball", mass=mass, center=tuple(center), radius=float(radius), normalize=normalize
    )


def uniform_box(lower, upper, mass: float = 1.0, normalize: bool = False) -> InitialMeasure:
    return InitialMeasure(
        "uniform_box", mass=mass, lower=tuple(lower), upper=tuple(upper), normalize=normalize
    )


def sum_of(components, normalize: bool = False) -> InitialMeasure:
    return InitialMeasure("sum", components=tuple(components), normalize=normalize)


def _check_dimension(what: str, coords, grid: Grid) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (grid.dimension,):
        raise ValueError(
            f"{what} {tuple(coords)} has wrong dimension for a {grid.dimension}D grid"
        )
    return coords


def _warn_if_clipped(what: str, lower, upper, grid: Grid) -> None:
    outside = any(lo < glo for lo, glo in zip(lower, grid.origin)) or any(
        hi > ghi for hi, ghi in zip(upper, grid.upper)
    )
    if outside:
        warnings.warn(
            f"{what} extends beyond the domain; the outside part is discarded",
            stacklevel=4,
        )


def _deposit(measure: InitialMeasure, grid: Grid, values: np.ndarray) -> None:
    if measure.kind == "sum":
        for component in measure.components:
            _deposit(component, grid, values)
        return
    if measure.mass == 0.0:
        return
    if measure.kind == "dirac":
        location = _check_dimension("dirac location", measure.location, grid)
        index = grid.containing_cell(location)
        if index is None:
            raise EmptyFieldError(f"dirac location {tuple(location)} lies outside the domain")
        values[index] += measure.mass / grid.cell_volume
        return

    mesh = grid.center_mesh()
    if measure.kind == "uniform_ball":
        center = _check_dimension("ball center", measure.center, grid)
        radius = float(measure.radius)
        _warn_if_clipped("ball", center - radius, center + radius, grid)
        dist_sq = sum((m - c) ** 2 for m, c in zip(mesh, center))
        inside = dist_sq <= radius * radius
        what = f"ball centered at {tuple(center)} with radius {radius}"
    else:
        lower = _check_dimension("box lower corner", measure.lower, grid)
        upper = _check_dimension("box upper corner", measure.upper, grid)
        _warn_if_clipped("box", lower, upper, grid)
        inside = np.ones(grid.shape, dtype=bool)
        for mesh_axis, lo, hi in zip(mesh, lower, upper):
            inside &= (mesh_axis >= lo) & (mesh_axis <= hi)
        what = f"box {tuple(lower)} .. {tuple(upper)}"
    count = int(np.count_nonzero(inside))
    if count == 0:
        raise EmptyFieldError(
            f"{what} captures no cell centers; refine the grid or enlarge the shape"
        )
    values[inside] += measure.mass / (count * grid.cell_volume)


def discretize(measure: InitialMeasure, grid: Grid) -> DensityField:
    """Deposit ``measure`` on ``grid`` and return the resulting density field.

    Raises EmptyFieldError when a component with positive mass deposits
    nothing; warns when a shape is clipped by the domain boundary.
    """
    values = np.zeros(grid.shape)
    _deposit(measure, grid, values)
    if measure.normalize:
        total = float(values.sum()) * grid.cell_volume
        if total <= 0.0:
            raise EmptyFieldError("cannot normalize a field with zero total mass")
        values /= total
    result = DensityField(grid, values)
    result.validate("discretized initial measure")
    return result
