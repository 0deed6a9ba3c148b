"""Empirical grid-convergence study.

There is no exact solution to compare against, so convergence is measured by
distances between runs of the same configuration at successive refinements:
cells are doubled per level while the step size shrinks proportionally (a
fixed dt is halved; a CFL-fraction policy rescales automatically).  In one
dimension the distance is the Wasserstein-1 metric between the final
densities, computed exactly for atomic measures from the cumulative
distribution functions.  In two dimensions cheaper moment gaps are reported
instead (mass, conserved first moment, second moment), which must plateau
toward zero under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .config import SimConfig, refine_config
from .fields import DensityField
from .sim import simulate

MODES = ("successive", "to_finest")


def wasserstein1_atoms(positions1, weights1, positions2, weights2) -> float:
    """Wasserstein-1 distance between two atomic probability measures on the line.

    Weights must be nonnegative with positive totals; both measures are
    normalized before comparison.  The distance is the integral of the
    absolute difference of the two cumulative distribution functions,
    evaluated exactly on the merged support.
    """
    x1 = np.asarray(positions1, dtype=float).ravel()
    x2 = np.asarray(positions2, dtype=float).ravel()
    w1 = np.asarray(weights1, dtype=float).ravel()
    w2 = np.asarray(weights2, dtype=float).ravel()
    if x1.shape != w1.shape or x2.shape != w2.shape:
        raise ValueError("positions and weights must have matching shapes")
    for what, w in (("first", w1), ("second", w2)):
        if w.size == 0:
            raise ValueError(f"{what} measure has no atoms")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValueError(f"{what} measure has invalid weights")
        if w.sum() <= 0.0:
            raise ValueError(f"{what} measure has zero total mass")
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
        raise ValueError("atom positions must be finite")

    positions = np.concatenate([x1, x2])
    cdf_steps = np.concatenate([w1 / w1.sum(), -w2 / w2.sum()])
    order = np.argsort(positions, kind="stable")
    positions = positions[order]
    cdf_gap = np.cumsum(cdf_steps[order])[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(positions)))


def wasserstein1_1d(field_a: DensityField, field_b: DensityField) -> float:
    """Wasserstein-1 distance between two one-dimensional density fields.

    The fields may live on different grids; each cell contributes an atom of
    mass ``value * cell_volume`` at its center.
    """
    for field in (field_a, field_b):
        if field.grid.dimension != 1:
            raise ValueError("wasserstein1_1d needs one-dimensional fields")
    return wasserstein1_atoms(
        field_a.grid.axis_centers(0),
        field_a.values * field_a.grid.cell_volume,
        field_b.grid.axis_centers(0),
        field_b.values * field_b.grid.cell_volume,
    )


@dataclass(frozen=True)
class RefinementRow:
    """Distances between one resolution level and its comparison partner."""

    level: int
    cells: tuple[int, ...]
    min_step: float
    dt: float
    distances: dict[str, float]


@dataclass(frozen=True)
class RefinementReport:
    dimension: int
    mode: str
    distance_names: tuple[str, ...]
    rows: tuple[RefinementRow, ...]

    def distances(self, name: str) -> list[float]:
        return [row.distances[name] for row in self.rows]

    def observed_orders(self, name: str) -> list[float]:
        """Base-2 log ratios of successive distances; the empirical order."""
        values = self.distances(name)
        return [
            float(np.log2(a / b)) if a > 0.0 and b > 0.0 else float("nan")
            for a, b in zip(values[:-1], values[1:])
        ]

    def to_csv_lines(self) -> list[str]:
        header = ["level", "cells", "min_step", "dt", *self.distance_names]
        lines = [",".join(header)]
        for row in self.rows:
            cells = "x".join(str(n) for n in row.cells)
            fields = [str(row.level), cells, str(row.min_step), str(row.dt)]
            fields += [str(row.distances[name]) for name in self.distance_names]
            lines.append(",".join(fields))
        return lines


def _moment_observables(state, weight: float) -> dict[str, float | np.ndarray]:
    return {
        "mass1": diagnostics.species_mass(state.rho1, weight),
        "mass2": diagnostics.species_mass(state.rho2, weight),
        "moment": diagnostics.first_moment(state.rho2, weight)
        - state.mobility * diagnostics.first_moment(state.rho1, weight),
        "second_moment": diagnostics.combined_second_moment(state, weight),
    }


def _species_w1(coarse: DensityField, fine: DensityField) -> float:
    # A species can be configured empty; two empty fields are at distance zero.
    if coarse.mass() == 0.0 and fine.mass() == 0.0:
        return 0.0
    return wasserstein1_1d(coarse, fine)


def _pair_distance(dimension: int, coarse, fine) -> dict[str, float]:
    if dimension == 1:
        return {
            "species1_w1": _species_w1(coarse.rho1, fine.rho1),
            "species2_w1": _species_w1(coarse.rho2, fine.rho2),
        }
    # Volume-weighted moments are comparable across grids.
    obs_c = _moment_observables(coarse, coarse.grid.cell_volume)
    obs_f = _moment_observables(fine, fine.grid.cell_volume)
    return {
        "mass1_gap": abs(obs_c["mass1"] - obs_f["mass1"]),
        "mass2_gap": abs(obs_c["mass2"] - obs_f["mass2"]),
        "moment_gap": float(np.max(np.abs(obs_c["moment"] - obs_f["moment"]))),
        "second_moment_gap": abs(obs_c["second_moment"] - obs_f["second_moment"]),
    }


def refinement_study(config: SimConfig, levels: int = 4, mode: str = "successive") -> RefinementReport:
    """Run ``config`` at ``levels`` resolutions and measure inter-level distances.

    Level ``l`` doubles the cell counts of the previous level; time steps keep
    a fixed CFL ratio.  With ``mode="successive"`` each row compares a level
    with the next finer one; with ``mode="to_finest"`` every coarser level is
    compared against the finest.
    """
    if levels < 2:
        raise ValueError(f"need at least two refinement levels, got {levels}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    runs = []
    for level in range(levels):
        level_config = refine_config(config, 2**level)
        result = simulate(level_config)
        runs.append((level, level_config, result))

    rows = []
    names: tuple[str, ...] = ()
    for index in range(levels - 1):
        level, level_config, result = runs[index]
        partner = runs[index + 1] if mode == "successive" else runs[-1]
        distances = _pair_distance(
            config.grid.dimension, result.final_state, partner[2].final_state
        )
        names = tuple(distances)
        rows.append(
            RefinementRow(
                level=level,
                cells=level_config.grid.cells,
                min_step=min(level_config.grid.steps),
                dt=result.base_dt,
                distances=distances,
            )
        )
    return RefinementReport(
        dimension=config.grid.dimension, mode=mode, distance_names=names, rows=tuple(rows)
    )
