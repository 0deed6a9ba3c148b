"""Scalar observables of a simulation state and runtime invariant checks.

Everything the scheme guarantees is condensed into per-state records: masses,
minima, per-species centers of mass, the conserved first moment of
``rho2 - mobility * rho1``, the dispersion of the combined weighted density,
the largest speeds, the distance of the joint support from the boundary, and
total-variation seminorms.  ``verify_invariants`` compares two records and
reports which guarantees held between them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DensityField, VelocityField
from .mesh import Grid
from .scheme import SimState

# Default per-step drift tolerances for the conservation checks.
MASS_RTOL = 1e-12
MOMENT_ATOL = 1e-10
SPEED_BOUND_SLACK = 1e-12


def species_mass(field: DensityField, weight: float) -> float:
    return float(field.values.sum()) * weight

def species_min(field: DensityField) -> float:
    return float(field.values.min())


def first_moment(field: DensityField, weight: float) -> np.ndarray:
    """Componentwise ``sum_J x_J rho_J * weight`` (not normalized)."""
    grid = field.grid
    mesh = grid.center_mesh()
    return np.array([float(np.sum(axis * field.values)) * weight for axis in mesh])


def species_com(field: DensityField, weight: float) -> np.ndarray:
    """Center of mass of one species; NaN components when it carries no mass."""
    mass = species_mass(field, weight)
    if mass <= 0.0:
        return np.full(field.grid.dimension, np.nan)
    return first_moment(field, weight) / mass


def combined_second_moment(state: SimState, weight: float) -> float:
    """Dispersion of ``mobility*rho1 + rho2`` about its own center of mass."""
    grid = state.grid
    combined = state.mobility * state.rho1.values + state.rho2.values
    total = float(combined.sum()) * weight
    if total <= 0.0:
        return 0.0
    mesh = grid.center_mesh()
    center = [float(np.sum(axis * combined)) * weight / total for axis in mesh]
    dispersion = 0.0
    for axis, c in zip(mesh, center):
        dispersion += float(np.sum((axis - c) ** 2 * combined)) * weight
    return dispersion


def support_margin(state: SimState) -> int:
    """Smallest cell distance from any occupied cell to the domain boundary.

    Zero means some mass sits in a boundary cell (outflow possible).  An
    entirely empty state reports the largest margin the grid allows.
    """
    occupied = (state.rho1.values > 0.0) | (state.rho2.values > 0.0)
    indices = np.nonzero(occupied)
    if indices[0].size == 0:
        return min((n - 1) // 2 for n in state.grid.cells)
    margin = None
    for axis_indices, n in zip(indices, state.grid.cells):
        axis_margin = int(min(axis_indices.min(), n - 1 - axis_indices.max()))
        margin = axis_margin if margin is None else min(margin, axis_margin)
    return margin


def total_variation(field: DensityField) -> float:
    """BV seminorm of the piecewise-constant extension (zero outside)."""
    grid = field.grid
    tv = 0.0
    for axis in range(grid.dimension):
        jumps = np.diff(field.values, axis=axis, prepend=0.0, append=0.0)
        tv += float(np.abs(jumps).sum()) * grid.cell_volume / grid.steps[axis]
    return tv


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Observables of one state; produced by ``record``."""

    time: float
    step_index: int
    mass1: float
    mass2: float
    min1: float
    min2: float
    com1: np.ndarray
    com2: np.ndarray
    conserved_moment: np.ndarray
    second_moment: float
    max_speed1: float
    max_speed2: float
    support_margin: int
    tv1: float
    tv2: float


def record(
    state: SimState,
    velocities: tuple[VelocityField, VelocityField] | None = None,
    weight: float | None = None,
) -> DiagnosticsRecord:
    """Compute all observables of ``state``.

    ``weight`` is the quadrature weight per cell (cell volume if None) and
    must match the one used for the velocities.  Without velocities the speed
    observables are reported as NaN.
    """
    if weight is None:
        weight = state.grid.cell_volume
    if velocities is None:
        max_speed1 = max_speed2 = float("nan")
    else:
        max_speed1 = velocities[0].max_speed()
        max_speed2 = velocities[1].max_speed()
    moment1 = first_moment(state.rho1, weight)
    moment2 = first_moment(state.rho2, weight)
    return DiagnosticsRecord(
        time=state.time,
        step_index=state.step_index,
        mass1=species_mass(state.rho1, weight),
        mass2=species_mass(state.rho2, weight),
        min1=species_min(state.rho1),
        min2=species_min(state.rho2),
        com1=species_com(state.rho1, weight),
        com2=species_com(state.rho2, weight),
        conserved_moment=moment2 - state.mobility * moment1,
        second_moment=combined_second_moment(state, weight),
        max_speed1=max_speed1,
        max_speed2=max_speed2,
        support_margin=support_margin(state),
        tv1=total_variation(state.rho1),
        tv2=total_variation(state.rho2),
    )


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class InvariantReport:
    checks: tuple[InvariantCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> tuple[InvariantCheck, ...]:
        return tuple(check for check in self.checks if not check.passed)

    def describe(self) -> str:
        return "; ".join(
            f"{check.name}: {'ok' if check.passed else 'FAIL'} ({check.detail})"
            for check in self.checks
        )


def verify_invariants(
    previous: DiagnosticsRecord,
    current: DiagnosticsRecord,
    potential_bounds: tuple[float, float, float],
    mobility: float,
    mass_rtol: float = MASS_RTOL,
    moment_atol: float = MOMENT_ATOL,
) -> InvariantReport:
    """Check the scheme guarantees between two records.

    ``potential_bounds`` are the certified gradient bounds of the two
    intra-species potentials and the coupling potential.  Mass and moment
    conservation are asserted only while the support of both records keeps a
    margin of at least one cell; once mass can reach the boundary, mass may
    only decrease (outflow) and the moment check is skipped.  Tolerances are
    per step and scaled by the number of steps between the records.
    """
    steps = max(current.step_index - previous.step_index, 1)
    intra_bound_1, intra_bound_2, cross_bound = potential_bounds
    checks: list[InvariantCheck] = []

    def add(name: str, passed: bool, detail: str) -> None:
        checks.append(InvariantCheck(name, bool(passed), detail))

    add(
        "positivity",
        current.min1 >= 0.0 and current.min2 >= 0.0,
        f"min1={current.min1}, min2={current.min2}",
    )
    finite = all(
        np.all(np.isfinite(value))
        for value in (
            current.mass1,
            current.mass2,
            current.conserved_moment,
            current.second_moment,
            current.tv1,
            current.tv2,
        )
    )
    add("finite", finite, "all observables finite" if finite else "non-finite observable")

    interior = previous.support_margin >= 1 and current.support_margin >= 1
    for label, before, after in (
        ("mass1", previous.mass1, current.mass1),
        ("mass2", previous.mass2, current.mass2),
    ):
        scale = max(abs(before), 1e-300)
        if interior:
            drift = abs(after - before)
            add(
                f"{label} conservation",
                drift <= mass_rtol * scale * steps,
                f"relative drift {drift / scale:.3e} over {steps} step(s)",
            )
        else:
            add(
                f"{label} outflow",
                after <= before + mass_rtol * scale * steps,
                f"mass {before} -> {after} with boundary contact",
            )
    if interior:
        drift = float(np.max(np.abs(current.conserved_moment - previous.conserved_moment)))
        add(
            "moment conservation",
            drift <= moment_atol * steps,
            f"absolute drift {drift:.3e} over {steps} step(s)",
        )
    else:
        add("moment conservation", True, "skipped: support touches the boundary")

    speed_bound_1 = intra_bound_1 * current.mass1 + cross_bound * current.mass2
    speed_bound_2 = intra_bound_2 * current.mass2 + mobility * cross_bound * current.mass1
    for label, speed, bound in (
        ("speed1", current.max_speed1, speed_bound_1),
        ("speed2", current.max_speed2, speed_bound_2),
    ):
        if np.isnan(speed):
            add(f"{label} bound", True, "skipped: no velocities recorded")
        else:
            add(
                f"{label} bound",
                speed <= bound + SPEED_BOUND_SLACK,
                f"max speed {speed} vs bound {bound}",
            )
    return InvariantReport(tuple(checks))


def csv_columns(dimension: int) -> list[str]:
    """Column names of the diagnostics time series, in file order."""
    axes = ["x", "y"][:dimension]
    columns = ["time", "step", "mass1", "mass2", "min1", "min2"]
    columns += [f"com1_{a}" for a in axes]
    columns += [f"com2_{a}" for a in axes]
    columns += [f"conserved_moment_{a}" for a in axes]
    columns += ["second_moment", "max_speed1", "max_speed2", "support_margin", "tv1", "tv2"]
    return columns


def csv_row(rec: DiagnosticsRecord) -> list[str]:
    """One diagnostics row, formatted for exact round-tripping."""
    cells: list[str] = [_fmt(rec.time), str(rec.step_index)]
    cells += [_fmt(v) for v in (rec.mass1, rec.mass2, rec.min1, rec.min2)]
    cells += [_fmt(v) for v in rec.com1]
    cells += [_fmt(v) for v in rec.com2]
    cells += [_fmt(v) for v in rec.conserved_moment]
    cells += [_fmt(rec.second_moment), _fmt(rec.max_speed1), _fmt(rec.max_speed2)]
    cells += [str(rec.support_margin), _fmt(rec.tv1), _fmt(rec.tv2)]
    return cells


def _fmt(value: float) -> str:
    # str() of a Python float is the shortest representation that round-trips,
    # which keeps re-written files byte-identical.
    return str(float(value))
