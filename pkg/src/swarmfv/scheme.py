"""Upwind finite-volume update and time-stepping driver.

The update is written in convex-combination form.  With ``nu_i = dt/dx_i``,
``a+ = max(a, 0)`` and ``a- = max(-a, 0)``, each new cell average is

    rho'[J] = (1 - sum_i nu_i (a+[i,J] + a-[i,J])) * rho[J]
            + sum_i nu_i (a-[i,J+e_i] * rho[J+e_i] + a+[i,J-e_i] * rho[J-e_i])

with zero ghost values outside the domain (mass that crosses the boundary
leaves the system).  Under the CFL condition

    (max gradient bound of either species) * sum_i dt/dx_i <= 1

the self-coefficient is nonnegative, so the update is a convex combination of
nonnegative cell values: positivity and the max-norm bound hold by
construction, total mass is conserved exactly away from the boundary, and the
first moment of ``rho2 - mobility * rho1`` is conserved up to rounding.

The self-coefficient is computed in floating point, so under a maximally
tight step it can land a few ulps below zero; values above ``-CFL_SLACK`` are
clamped to zero (a relative perturbation at machine precision), while values
below that indicate a genuine CFL violation and raise.  Both guards can be
switched off to observe the raw scheme fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigurationError, NumericalIntegrityError
from .fields import DensityField, VelocityField, require_same_grid
from .mesh import Grid

# Tolerance separating rounding residue from a genuine CFL violation.
CFL_SLACK = 1e-12

_VelocityFn = Callable[["SimState"], tuple[VelocityField, VelocityField]]
_Hook = Callable[["SimState", tuple[VelocityField, VelocityField]], None]


@dataclass(frozen=True)
class SimState:
    """Densities of both species plus clock, step counter and coupling strength."""

    grid: Grid
    rho1: DensityField
    rho2: DensityField
    time: float
    step_index: int
    mobility: float

    def __post_init__(self) -> None:
        require_same_grid(self.grid, self.rho1, self.rho2)
        if not np.isfinite(self.time):
            raise ValueError(f"time must be finite, got {self.time}")
        if self.step_index < 0:
            raise ValueError(f"step_index must be nonnegative, got {self.step_index}")
        if not 0.0 <= self.mobility < 1.0:
            raise ValueError(f"mobility must lie in [0, 1), got {self.mobility}")


@dataclass(frozen=True)
class FixedDt:
    """Step with a constant dt (validated against the CFL budget up front)."""

    dt: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.dt) or self.dt <= 0.0:
            raise ValueError(f"dt must be positive and finite, got {self.dt}")


@dataclass(frozen=True)
class CflFraction:
    """Step with the given fraction of the certified CFL budget."""

    fraction: float

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"CFL fraction must lie in (0, 1], got {self.fraction}")


DtPolicy = FixedDt | CflFraction


def cfl_max_dt(grid: Grid, intra_bound_1: float, intra_bound_2: float, cross_bound: float) -> float:
    """Largest stable step for unit total mass per species.

    The velocity of either species is bounded by
    ``max(intra_bound_1, intra_bound_2) + cross_bound`` when both densities
    carry mass at most one, and the convex-combination form stays valid while
    ``bound * sum_i dt/dx_i <= 1``.  Returns ``inf`` when every bound is zero
    (all velocities vanish, any step is stable).
    """
    for name, value in (
        ("intra_bound_1", intra_bound_1),
        ("intra_bound_2", intra_bound_2),
        ("cross_bound", cross_bound),
    ):
        if value < 0.0 or not np.isfinite(value):
            raise ValueError(f"{name} must be finite and nonnegative, got {value}")
    speed_bound = max(intra_bound_1, intra_bound_2) + cross_bound
    if speed_bound == 0.0:
        return math.inf
    inverse_steps = sum(1.0 / h for h in grid.steps)
    return 1.0 / (inverse_steps * speed_bound)


def _pull(values: np.ndarray, axis: int, shift: int) -> np.ndarray:
    """Values of the neighbor at ``J + shift*e_axis``, zero outside the grid."""
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if shift == 1:
        dst[axis] = slice(0, -1)
        src[axis] = slice(1, None)
    else:
        dst[axis] = slice(1, None)
        src[axis] = slice(0, -1)
    out[tuple(dst)] = values[tuple(src)]
    return out


def _advance_species(
    values: np.ndarray,
    velocity: VelocityField,
    nus: tuple[float, ...],
    enforce_cfl: bool,
) -> np.ndarray:
    outflow = np.zeros_like(values)
    inflow = np.zeros_like(values)
    for axis, nu in enumerate(nus):
        a = velocity.components[axis]
        a_pos = np.maximum(a, 0.0)
        a_neg = np.maximum(-a, 0.0)
        outflow += nu * (a_pos + a_neg)
        inflow += nu * (_pull(a_neg * values, axis, +1) + _pull(a_pos * values, axis, -1))
    stay = 1.0 - outflow
    if enforce_cfl:
        worst = float(stay.min())
        if worst < -CFL_SLACK:
            raise ConfigurationError(
                f"CFL violation: self-coefficient reaches {worst}; "
                f"reduce dt by at least a factor {1.0 - worst}"
            )
        np.maximum(stay, 0.0, out=stay)
    return stay * values + inflow


def upwind_step(
    state: SimState,
    dt: float,
    velocities: tuple[VelocityField, VelocityField],
    *,
    enforce_cfl: bool = True,
    check_values: bool = True,
) -> SimState:
    """Advance both species by one upwind step of size ``dt``.

    With ``enforce_cfl`` the step refuses to run (ConfigurationError) if any
    cell's self-coefficient falls below the rounding slack, and clamps
    rounding residue so the result is nonnegative by construction.  With
    ``check_values`` the output fields are verified finite and nonnegative
    (NumericalIntegrityError otherwise); this only fires when a guarantee was
    switched off or genuinely broken.
    """
    if not np.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be positive and finite, got {dt}")
    v1, v2 = velocities
    require_same_grid(state.grid, v1, v2)
    nus = tuple(dt / h for h in state.grid.steps)
    new1 = _advance_species(state.rho1.values, v1, nus, enforce_cfl)
    new2 = _advance_species(state.rho2.values, v2, nus, enforce_cfl)
    rho1 = DensityField(state.grid, new1)
    rho2 = DensityField(state.grid, new2)
    if check_values:
        rho1.validate("species 1 after step")
        rho2.validate("species 2 after step")
    return replace(
        state,
        rho1=rho1,
        rho2=rho2,
        time=state.time + dt,
        step_index=state.step_index + 1,
    )


def run(
    initial: SimState,
    t_final: float,
    dt_policy: DtPolicy,
    velocity_fn: _VelocityFn,
    cfl_limit: float = math.inf,
    hooks: Iterable[_Hook] = (),
    *,
    enforce_cfl: bool = True,
    check_values: bool = True,
) -> SimState:
    """Step from ``initial`` to exactly ``t_final``.

    ``velocity_fn`` maps a state to the velocity pair for that state.  Hooks
    run once per visited state (including the initial and final ones) and
    receive the state together with its velocities; they must not mutate
    either.  A fixed dt larger than ``cfl_limit`` is refused before any work
    is done; the final step is shortened so the run lands on ``t_final``
    without overshoot.
    """
    if not np.isfinite(t_final):
        raise ValueError(f"t_final must be finite, got {t_final}")
    if t_final < initial.time:
        raise ConfigurationError(
            f"t_final {t_final} lies before the initial time {initial.time}"
        )
    if isinstance(dt_policy, FixedDt):
        base_dt = dt_policy.dt
        if base_dt > cfl_limit * (1.0 + CFL_SLACK):
            raise ConfigurationError(
                f"fixed dt {base_dt} exceeds the CFL budget {cfl_limit}; "
                f"largest admissible dt is {cfl_limit}"
            )
    elif isinstance(dt_policy, CflFraction):
        base_dt = dt_policy.fraction * cfl_limit
        if base_dt <= 0.0:
            raise ConfigurationError(f"CFL budget {cfl_limit} leaves no admissible dt")
    else:
        raise TypeError(f"unknown dt policy {dt_policy!r}")

    hooks = tuple(hooks)
    time_tol = 1e-12 * max(1.0, abs(t_final))
    state = initial
    while True:
        if state.time != t_final and abs(t_final - state.time) <= time_tol:
            # Land exactly on t_final instead of a rounding ulp away.
            state = replace(state, time=t_final)
        velocities = velocity_fn(state)
        for hook in hooks:
            hook(state, velocities)
        if state.time >= t_final:
            return state
        dt = min(base_dt, t_final - state.time)
        state = upwind_step(
            state, dt, velocities, enforce_cfl=enforce_cfl, check_values=check_values
        )
