"""Shared builders for randomized solver tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from swarmfv import (
    DensityField,
    Grid,
    KernelTable,
    Potential,
    SimState,
    build_kernel_table,
    cfl_max_dt,
)

KIND_POOL = ("zero", "newtonian", "exponential", "fly_and_regroup")


@dataclass
class RandomSetup:
    grid: Grid
    potentials: tuple[Potential, Potential, Potential]
    tables: tuple[KernelTable, KernelTable, KernelTable]
    bounds: tuple[float, float, float]
    mobility: float
    weight: float
    state: SimState
    cfl_limit: float


def random_grid(rng: np.random.Generator, dimension: int, max_cells: int = 64) -> Grid:
    if dimension == 1:
        cells = (int(rng.integers(48, 4 * max_cells + 1)),)
    else:
        cells = tuple(int(rng.integers(12, max_cells + 1)) for _ in range(2))
    origin = tuple(float(rng.uniform(-2.0, 0.0)) for _ in range(dimension))
    extent = tuple(float(rng.uniform(0.5, 3.0)) for _ in range(dimension))
    return Grid.from_extent(origin, extent, cells)


def random_potential(rng: np.random.Generator) -> Potential:
    kind = KIND_POOL[int(rng.integers(len(KIND_POOL)))]
    if kind == "zero":
        return Potential("zero")
    return Potential(kind, float(rng.uniform(0.05, 1.5)))


def random_interior_density(
    rng: np.random.Generator, grid: Grid, margin: int = 4
) -> DensityField:
    """Random nonnegative data away from the boundary, normalized to mass one."""
    values = np.zeros(grid.shape)
    window = tuple(
        slice(margin, max(margin + 1, n - margin)) for n in grid.cells
    )
    values[window] = rng.random(values[window].shape)
    total = values.sum() * grid.cell_volume
    assert total > 0.0
    values /= total
    return DensityField(grid, values)


def random_setup(seed: int, dimension: int, max_cells: int = 64) -> RandomSetup:
    rng = np.random.default_rng(seed)
    grid = random_grid(rng, dimension, max_cells)
    potentials = tuple(random_potential(rng) for _ in range(3))
    if all(p.kind == "zero" for p in potentials):
        potentials = (Potential("newtonian", 0.5), potentials[1], potentials[2])
    tables = tuple(build_kernel_table(grid, p) for p in potentials)
    bounds = tuple(p.certify_lipschitz_bound() for p in potentials)
    mobility = float(rng.uniform(0.0, 0.95))
    weight = grid.cell_volume
    state = SimState(
        grid=grid,
        rho1=random_interior_density(rng, grid),
        rho2=random_interior_density(rng, grid),
        time=0.0,
        step_index=0,
        mobility=mobility,
    )
    limit = cfl_max_dt(grid, *bounds)
    return RandomSetup(grid, potentials, tables, bounds, mobility, weight, state, limit)
