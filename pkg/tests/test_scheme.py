from __future__ import annotations

import math

import numpy as np
import pytest

from swarmfv import (
    CflFraction,
    DensityField,
    FixedDt,
    Grid,
    SimState,
    VelocityField,
    build_kernel_table,
    cfl_max_dt,
    compute_velocities_direct,
    newtonian,
    run,
    upwind_step,
    zero,
)
from swarmfv.errors import ConfigurationError, NumericalIntegrityError

from support import random_setup


def make_velocity_fn(tables, mobility, weight):
    def velocity_fn(state):
        return compute_velocities_direct(state.rho1, state.rho2, *tables, mobility, weight)

    return velocity_fn


def two_dirac_state():
    grid = Grid((-1.0,), (50,), (0.04,))
    values = np.zeros(50)
    values[12] = 0.5 / 0.04
    values[37] = 0.5 / 0.04
    return SimState(
        grid=grid,
        rho1=DensityField(grid, values),
        rho2=DensityField.zeros(grid),
        time=0.0,
        step_index=0,
        mobility=0.0,
    )


def test_cfl_max_dt_frozen_2d():
    # Equal steps h, gradient bounds 0.1/0.1/1.0: the budget is h/2.2.
    h = 0.02
    grid = Grid((0.0, 0.0), (50, 50), (h, h))
    assert cfl_max_dt(grid, 0.1, 0.1, 1.0) == pytest.approx(h / 2.2, rel=1e-15)


def test_cfl_max_dt_1d_and_sentinel():
    grid = Grid((0.0,), (10,), (1.0,))
    assert cfl_max_dt(grid, 1.0, 0.0, 0.0) == 1.0
    assert cfl_max_dt(grid, 0.25, 1.0, 0.5) == pytest.approx(1.0 / 1.5, rel=1e-15)
    assert cfl_max_dt(grid, 0.0, 0.0, 0.0) == math.inf
    with pytest.raises(ValueError):
        cfl_max_dt(grid, -0.1, 0.0, 0.0)


def test_zero_velocity_is_identity():
    rng = np.random.default_rng(12)
    grid = Grid((0.0, 0.0), (8, 6), (0.5, 0.25))
    state = SimState(
        grid=grid,
        rho1=DensityField(grid, rng.random((8, 6))),
        rho2=DensityField(grid, rng.random((8, 6))),
        time=0.0,
        step_index=0,
        mobility=0.2,
    )
    still = VelocityField(grid, np.zeros((2, 8, 6)))
    new = upwind_step(state, 0.125, (still, still))
    assert np.array_equal(new.rho1.values, state.rho1.values)
    assert np.array_equal(new.rho2.values, state.rho2.values)
    assert new.time == 0.125
    assert new.step_index == 1


def test_two_dirac_one_step_frozen():
    # dt = 0.02 gives nu = 1/2; each point mass keeps 3/4 of its height and
    # sends 1/4 to its inward neighbor.
    state = two_dirac_state()
    tables = (
        build_kernel_table(state.grid, newtonian(1.0)),
        build_kernel_table(state.grid, zero()),
        build_kernel_table(state.grid, zero()),
    )
    velocities = compute_velocities_direct(
        state.rho1, state.rho2, *tables, 0.0, state.grid.cell_volume
    )
    new = upwind_step(state, 0.02, velocities)
    expected = np.zeros(50)
    expected[12] = 9.375
    expected[13] = 3.125
    expected[36] = 3.125
    expected[37] = 9.375
    assert np.array_equal(new.rho1.values, expected)
    assert new.rho1.mass() == state.rho1.mass()
    centers = state.grid.axis_centers(0)
    assert abs(float(centers @ new.rho1.values) * 0.04) <= 1e-15


def test_stationary_single_dirac_bitwise():
    grid = Grid((0.0,), (31,), (0.1,))
    values = np.zeros(31)
    values[15] = 10.0
    state = SimState(grid, DensityField(grid, values), DensityField.zeros(grid), 0.0, 0, 0.0)
    tables = (
        build_kernel_table(grid, newtonian(0.7)),
        build_kernel_table(grid, zero()),
        build_kernel_table(grid, zero()),
    )
    velocity_fn = make_velocity_fn(tables, 0.0, grid.cell_volume)
    dt = 0.9 * cfl_max_dt(grid, 0.7, 0.0, 0.0)
    for _ in range(100):
        state = upwind_step(state, dt, velocity_fn(state))
    assert np.array_equal(state.rho1.values, values)


def test_step_refuses_cfl_violation():
    setup = random_setup(0, 1)
    velocities = compute_velocities_direct(
        setup.state.rho1, setup.state.rho2, *setup.tables, setup.mobility, setup.weight
    )
    with pytest.raises(ConfigurationError):
        upwind_step(setup.state, 5.0 * setup.cfl_limit, velocities)


def test_unguarded_violation_goes_negative():
    setup = random_setup(0, 1)
    state = setup.state
    velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
    dt = 5.0 * setup.cfl_limit
    for _ in range(500):
        state = upwind_step(
            state, dt, velocity_fn(state), enforce_cfl=False, check_values=False
        )
        if state.rho1.values.min() < 0.0 or state.rho2.values.min() < 0.0:
            break
    assert state.rho1.values.min() < 0.0 or state.rho2.values.min() < 0.0

    # With the value check on, the same step raises instead.
    with pytest.raises(NumericalIntegrityError):
        bad = setup.state
        for _ in range(500):
            bad = upwind_step(bad, dt, velocity_fn(bad), enforce_cfl=False)


def test_run_refuses_fixed_dt_above_budget():
    setup = random_setup(1, 1)
    calls = []

    def velocity_fn(state):
        calls.append(state.step_index)
        return compute_velocities_direct(
            state.rho1, state.rho2, *setup.tables, setup.mobility, setup.weight
        )

    with pytest.raises(ConfigurationError):
        run(setup.state, 1.0, FixedDt(5.0 * setup.cfl_limit), velocity_fn, setup.cfl_limit)
    assert calls == []


def test_run_zero_steps_returns_state_as_is():
    setup = random_setup(2, 2, max_cells=16)
    seen = []

    def hook(state, velocities):
        seen.append((state.time, state.step_index))

    final = run(
        setup.state,
        setup.state.time,
        FixedDt(setup.cfl_limit),
        make_velocity_fn(setup.tables, setup.mobility, setup.weight),
        setup.cfl_limit,
        hooks=(hook,),
    )
    assert final is setup.state
    assert seen == [(0.0, 0)]


def test_run_lands_exactly_on_t_final():
    setup = random_setup(3, 1)
    velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
    dt = 0.4 * setup.cfl_limit
    t_final = 3.3 * dt
    final = run(setup.state, t_final, FixedDt(dt), velocity_fn, setup.cfl_limit)
    assert final.time == t_final
    assert final.step_index == 4


def test_run_cfl_fraction_policy():
    setup = random_setup(4, 1)
    velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
    t_final = 2.5 * setup.cfl_limit
    final = run(setup.state, t_final, CflFraction(0.5), velocity_fn, setup.cfl_limit)
    assert final.time == t_final
    assert final.step_index == 5


def test_run_validation():
    setup = random_setup(5, 1)
    velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
    with pytest.raises(ConfigurationError):
        run(setup.state, -1.0, FixedDt(0.1), velocity_fn, setup.cfl_limit)
    with pytest.raises(TypeError):
        run(setup.state, 1.0, 0.05, velocity_fn, setup.cfl_limit)
    with pytest.raises(ValueError):
        FixedDt(-0.1)
    with pytest.raises(ValueError):
        CflFraction(0.0)
    with pytest.raises(ValueError):
        CflFraction(1.5)


def test_hooks_see_every_state_in_order():
    setup = random_setup(6, 1)
    velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
    dt = 0.5 * setup.cfl_limit
    seen = []

    def hook(state, velocities):
        assert velocities[0].grid == state.grid
        seen.append((state.step_index, state.time))

    final = run(setup.state, 4 * dt, FixedDt(dt), velocity_fn, setup.cfl_limit, hooks=(hook,))
    assert [s for s, _ in seen] == [0, 1, 2, 3, 4]
    times = [t for _, t in seen]
    assert times == sorted(times)
    assert times[-1] == final.time


def test_conservation_and_positivity_random_sweep():
    # Positivity is exact; away from the boundary mass is conserved to 1e-12
    # relative and the first moment of rho2 - mobility*rho1 to 1e-10 absolute
    # per step.  (The max norm may grow: the dynamics concentrate mass.)
    for seed in range(12):
        dimension = 1 if seed % 2 == 0 else 2
        setup = random_setup(100 + seed, dimension, max_cells=24)
        rng = np.random.default_rng(200 + seed)
        dt = float(rng.uniform(0.25, 1.0)) * setup.cfl_limit
        velocity_fn = make_velocity_fn(setup.tables, setup.mobility, setup.weight)
        state = setup.state
        mesh = state.grid.center_mesh()

        def moment(state):
            return np.array(
                [
                    float(np.sum(axis * (state.rho2.values - state.mobility * state.rho1.values)))
                    * setup.weight
                    for axis in mesh
                ]
            )

        def margin(state):
            occupied = (state.rho1.values > 0) | (state.rho2.values > 0)
            idx = np.nonzero(occupied)
            return min(
                min(ax.min(), n - 1 - ax.max()) for ax, n in zip(idx, state.grid.cells)
            )

        for _ in range(60):
            prev = state
            state = upwind_step(state, dt, velocity_fn(state))
            assert state.rho1.values.min() >= 0.0
            assert state.rho2.values.min() >= 0.0
            if margin(prev) >= 1 and margin(state) >= 1:
                for before, after in (
                    (prev.rho1.mass(setup.weight), state.rho1.mass(setup.weight)),
                    (prev.rho2.mass(setup.weight), state.rho2.mass(setup.weight)),
                ):
                    assert abs(after - before) <= 1e-12 * max(abs(before), 1e-300)
                assert np.max(np.abs(moment(state) - moment(prev))) <= 1e-10
            else:
                assert state.rho1.mass(setup.weight) <= prev.rho1.mass(setup.weight) * (1 + 1e-13)
                assert state.rho2.mass(setup.weight) <= prev.rho2.mass(setup.weight) * (1 + 1e-13)


def test_step_input_validation():
    setup = random_setup(7, 1)
    velocities = compute_velocities_direct(
        setup.state.rho1, setup.state.rho2, *setup.tables, setup.mobility, setup.weight
    )
    with pytest.raises(ValueError):
        upwind_step(setup.state, 0.0, velocities)
    with pytest.raises(ValueError):
        upwind_step(setup.state, float("nan"), velocities)
