"""Simulation driver: wire a configuration into a full run with file output.

A run produces, inside the chosen output directory:

``snapshots/species<1|2>_<step>.csv``
    Cell centers and densities at the snapshot steps, one row per cell, plus
    a ``snapshot_<step>.meta.txt`` sidecar with the time, step and grid.
``diagnostics.csv``
    The diagnostics time series (see ``diagnostics.csv_columns``).
``meta.txt``
    Grid, potentials, resolved time step and stability budget of the run.

All numbers are written in shortest round-trip decimal form, so two runs of
the same configuration produce byte-identical files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig
from .diagnostics import (
    DiagnosticsRecord,
    InvariantReport,
    csv_columns,
    csv_row,
    record,
    verify_invariants,
)
from .errors import NumericalIntegrityError
from .initial import discretize
from .scheme import FixedDt, SimState, cfl_max_dt, run
from .velocity import build_kernel_table, compute_velocities

SNAPSHOT_DIR = "snapshots"
DIAGNOSTICS_FILE = "diagnostics.csv"
META_FILE = "meta.txt"


@dataclass(frozen=True)
class SimResult:
    """Everything a finished run hands back to the caller."""

    config: SimConfig
    final_state: SimState
    records: tuple[DiagnosticsRecord, ...]
    invariant_reports: tuple[InvariantReport, ...]
    base_dt: float
    cfl_limit: float
    certified_bounds: tuple[float, float, float]
    output_dir: Path | None


def _fmt(value: float) -> str:
    return str(float(value))


def write_snapshot(state: SimState, directory: str | Path) -> list[Path]:
    """Write one delimited-text snapshot per species plus a metadata sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = state.grid
    mesh = np.meshgrid(*(grid.axis_centers(i) for i in range(grid.dimension)), indexing="ij")
    coords = np.stack([axis.ravel() for axis in mesh], axis=-1)
    tag = f"{state.step_index:06d}"
    written = []
    for species, field in (("species1", state.rho1), ("species2", state.rho2)):
        path = directory / f"{species}_{tag}.csv"
        write_snapshot_csv(path, coords, field.values.ravel())
        written.append(path)
    meta_path = directory / f"snapshot_{tag}.meta.txt"
    meta_lines = [
        f"time = {_fmt(state.time)}",
        f"step = {state.step_index}",
        f"grid.origin = {list(grid.origin)}",
        f"grid.cells = {list(grid.cells)}",
        f"grid.steps = {list(grid.steps)}",
    ]
    meta_path.write_text("\n".join(meta_lines) + "\n")
    written.append(meta_path)
    return written


def write_snapshot_csv(path: str | Path, coords: np.ndarray, values: np.ndarray) -> None:
    """Write rows of cell-center coordinates and density values."""
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float).ravel()
    if coords.ndim != 2 or coords.shape[0] != values.size:
        raise ValueError("coords must be (n, dimension) matching n density values")
    header = ",".join(["x", "y"][: coords.shape[1]] + ["density"])
    lines = [header]
    for point, value in zip(coords, values):
        lines.append(",".join([_fmt(c) for c in point] + [_fmt(value)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a snapshot written by ``write_snapshot_csv``: (coords, values)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"snapshot file {path} is empty")
    columns = lines[0].split(",")
    dimension = len(columns) - 1
    coords = []
    values = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != dimension + 1:
            raise ValueError(f"snapshot row {line!r} does not match header {columns}")
        coords.append([float(p) for p in parts[:dimension]])
        values.append(float(parts[-1]))
    return np.array(coords), np.array(values)


def _write_meta(
    out_dir: Path, config: SimConfig, result_items: list[tuple[str, str]]
) -> Path:
    lines = [f"swarmfv {__version__}"]
    if config.label:
        lines.append(f"label = {config.label}")
    grid = config.grid
    lines += [
        f"grid.origin = {list(grid.origin)}",
        f"grid.cells = {list(grid.cells)}",
        f"grid.steps = {list(grid.steps)}",
        f"potentials.intra1 = {config.intra1}",
        f"potentials.intra2 = {config.intra2}",
        f"potentials.cross = {config.cross}",
        f"mobility = {_fmt(config.mobility)}",
        f"velocity.path = {config.velocity_path}",
        f"velocity.volume_weighted = {config.volume_weighted}",
        f"time.t_final = {_fmt(config.t_final)}",
    ]
    lines += [f"{key} = {value}" for key, value in result_items]
    path = out_dir / META_FILE
    path.write_text("\n".join(lines) + "\n")
    return path


def initial_state(config: SimConfig) -> SimState:
    """Discretize the configured initial measures into a starting state."""
    rho1 = discretize(config.initial1, config.grid)
    rho2 = discretize(config.initial2, config.grid)
    return SimState(
        grid=config.grid,
        rho1=rho1,
        rho2=rho2,
        time=0.0,
        step_index=0,
        mobility=config.mobility,
    )


def simulate(
    config: SimConfig,
    out_dir: str | Path | None = None,
    *,
    snapshot_every: int | None = None,
    invariant_policy: str | None = None,
) -> SimResult:
    """Run a configuration to its final time.

    With ``out_dir`` set, snapshots, the diagnostics series and run metadata
    are written there; without it the run stays in memory.  ``snapshot_every``
    and ``invariant_policy`` override the corresponding config entries.
    Invariant failures warn under the ``warn`` policy and raise
    NumericalIntegrityError under ``fatal``.
    """
    if snapshot_every is None:
        snapshot_every = config.snapshot_every
    if invariant_policy is None:
        invariant_policy = config.invariant_policy

    bounds = config.certified_bounds()
    limit = cfl_max_dt(config.grid, *bounds)
    if isinstance(config.dt_policy, FixedDt):
        base_dt = config.dt_policy.dt
    else:
        base_dt = config.dt_policy.fraction * limit

    tables = (
        build_kernel_table(config.grid, config.intra1),
        build_kernel_table(config.grid, config.intra2),
        build_kernel_table(config.grid, config.cross),
    )
    weight = config.quadrature_weight

    def velocity_fn(state: SimState):
        return compute_velocities(
            state.rho1, state.rho2, *tables, config.mobility, weight, path=config.velocity_path
        )

    out_path: Path | None = None
    snapshot_dir: Path | None = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        snapshot_dir = out_path / SNAPSHOT_DIR

    records: list[DiagnosticsRecord] = []
    reports: list[InvariantReport] = []
    state0 = initial_state(config)

    def is_final(state: SimState) -> bool:
        return state.time >= config.t_final

    def observer(state: SimState, velocities) -> None:
        final = is_final(state)
        step = state.step_index
        if snapshot_dir is not None and (
            step == 0 or final or (snapshot_every > 0 and step % snapshot_every == 0)
        ):
            write_snapshot(state, snapshot_dir)
        if step == 0 or final or step % config.diagnostics_every == 0:
            if records and records[-1].step_index == step:
                return
            rec = record(state, velocities, weight)
            if records and invariant_policy != "off":
                report = verify_invariants(records[-1], rec, bounds, config.mobility)
                reports.append(report)
                if not report.passed:
                    message = (
                        f"invariant failure at step {step} (t={state.time}): "
                        + report.describe()
                    )
                    if invariant_policy == "fatal":
                        raise NumericalIntegrityError(message)
                    warnings.warn(message, stacklevel=2)
            records.append(rec)

    final_state = run(
        state0,
        config.t_final,
        config.dt_policy,
        velocity_fn,
        cfl_limit=limit,
        hooks=(observer,),
    )

    if out_path is not None:
        columns = csv_columns(config.grid.dimension)
        lines = [",".join(columns)]
        lines += [",".join(csv_row(rec)) for rec in records]
        (out_path / DIAGNOSTICS_FILE).write_text("\n".join(lines) + "\n")
        _write_meta(
            out_path,
            config,
            [
                ("certified_bounds.intra1", _fmt(bounds[0])),
                ("certified_bounds.intra2", _fmt(bounds[1])),
                ("certified_bounds.cross", _fmt(bounds[2])),
                ("cfl_limit", _fmt(limit)),
                ("base_dt", _fmt(base_dt)),
                ("steps", str(final_state.step_index)),
                ("final_time", _fmt(final_state.time)),
            ],
        )

    return SimResult(
        config=config,
        final_state=final_state,
        records=tuple(records),
        invariant_reports=tuple(reports),
        base_dt=base_dt,
        cfl_limit=limit,
        certified_bounds=bounds,
        output_dir=out_path,
    )
