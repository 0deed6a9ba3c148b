"""Finite-volume simulation of two nonlocally interacting species.

Two densities move under convolution velocities built from radial interaction
potentials: each species aggregates under its own potential while species 1
chases species 2 and species 2 retreats, with a mobility parameter scaling the
retreat.  The explicit upwind scheme preserves positivity, mass and a weighted
first moment under a CFL condition derived from certified gradient bounds, and
the package ships the diagnostics and refinement tooling to verify those
guarantees at runtime.
"""

__version__ = "0.1.0"

from .config import SimConfig, list_scenarios, load_scenario, parse_config, refine_config, resolve_config
from .convergence import (
    RefinementReport,
    RefinementRow,
    refinement_study,
    wasserstein1_1d,
    wasserstein1_atoms,
)
from .diagnostics import DiagnosticsRecord, InvariantReport, record, verify_invariants
from .errors import (
    ConfigurationError,
    EmptyFieldError,
    GridMismatchError,
    InternalConsistencyError,
    NumericalIntegrityError,
    ResourceLimitError,
)
from .fields import DensityField, VelocityField
from .initial import InitialMeasure, dirac, discretize, sum_of, uniform_ball, uniform_box
from .mesh import Grid
from .potentials import Potential, exponential, fly_and_regroup, newtonian, zero
from .scheme import CflFraction, FixedDt, SimState, cfl_max_dt, run, upwind_step
from .sim import SimResult, initial_state, read_snapshot, simulate, write_snapshot
from .velocity import (
    KernelTable,
    build_kernel_table,
    compute_velocities,
    compute_velocities_direct,
    compute_velocities_fast,
)

__all__ = [
    "__version__",
    "SimConfig",
    "list_scenarios",
    "load_scenario",
    "parse_config",
    "refine_config",
    "resolve_config",
    "RefinementReport",
    "RefinementRow",
    "refinement_study",
    "wasserstein1_1d",
    "wasserstein1_atoms",
    "DiagnosticsRecord",
    "InvariantReport",
    "record",
    "verify_invariants",
    "ConfigurationError",
    "EmptyFieldError",
    "GridMismatchError",
    "InternalConsistencyError",
    "NumericalIntegrityError",
    "ResourceLimitError",
    "DensityField",
    "VelocityField",
    "InitialMeasure",
    "dirac",
    "discretize",
    "sum_of",
    "uniform_ball",
    "uniform_box",
    "Grid",
    "Potential",
    "exponential",
    "fly_and_regroup",
    "newtonian",
    "zero",
    "CflFraction",
    "FixedDt",
    "SimState",
    "cfl_max_dt",
    "run",
    "upwind_step",
    "SimResult",
    "initial_state",
    "read_snapshot",
    "simulate",
    "write_snapshot",
    "KernelTable",
    "build_kernel_table",
    "compute_velocities",
    "compute_velocities_direct",
    "compute_velocities_fast",
]
