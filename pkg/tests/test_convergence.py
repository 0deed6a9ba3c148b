from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from swarmfv import (
    DensityField,
    Grid,
    parse_config,
    refinement_study,
    wasserstein1_1d,
    wasserstein1_atoms,
)


def test_w1_split_mass_vs_center():
    # Half the mass moves 0.5 left, half 0.5 right: cost 0.5 exactly.
    assert wasserstein1_atoms([0.0, 1.0], [0.5, 0.5], [0.5], [1.0]) == 0.5


def test_w1_translated_diracs():
    assert wasserstein1_atoms([0.25], [1.0], [0.875], [1.0]) == 0.625
    # Totals are normalized away.
    assert wasserstein1_atoms([0.25], [2.0], [0.875], [3.0]) == 0.625


def test_w1_identical_measures_is_zero():
    rng = np.random.default_rng(5)
    x = rng.normal(size=20)
    w = rng.random(20)
    assert wasserstein1_atoms(x, w, x, w) == 0.0


def test_w1_symmetry_and_triangle():
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = [rng.normal(size=rng.integers(1, 30)) for _ in range(3)]
        w = [rng.random(xi.size) + 1e-3 for xi in x]
        d01 = wasserstein1_atoms(x[0], w[0], x[1], w[1])
        d10 = wasserstein1_atoms(x[1], w[1], x[0], w[0])
        d02 = wasserstein1_atoms(x[0], w[0], x[2], w[2])
        d12 = wasserstein1_atoms(x[1], w[1], x[2], w[2])
        assert abs(d01 - d10) <= 1e-15
        assert d02 <= d01 + d12 + 1e-12


def test_w1_matches_scipy():
    rng = np.random.default_rng(23)
    for _ in range(25):
        x1 = rng.normal(size=rng.integers(1, 40))
        x2 = rng.normal(size=rng.integers(1, 40))
        w1 = rng.random(x1.size)
        w2 = rng.random(x2.size)
        ours = wasserstein1_atoms(x1, w1, x2, w2)
        reference = stats.wasserstein_distance(x1, x2, w1, w2)
        assert ours == pytest.approx(reference, abs=1e-12)


def test_w1_input_validation():
    with pytest.raises(ValueError):
        wasserstein1_atoms([0.0, 1.0], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        wasserstein1_atoms([], [], [0.0], [1.0])
    with pytest.raises(ValueError):
        wasserstein1_atoms([0.0], [-1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        wasserstein1_atoms([0.0, 1.0], [0.0, 0.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        wasserstein1_atoms([float("inf")], [1.0], [0.0], [1.0])


def test_w1_fields_across_grids():
    # Two lattice renderings of the same uniform measure are within one
    # coarse cell of each other.
    fields = []
    for cells in (32, 48):
        grid = Grid((0.0,), (cells,), (1.0 / cells,))
        fields.append(DensityField(grid, np.full(cells, 1.0)))
    gap = wasserstein1_1d(*fields)
    assert 0.0 < gap < 1.0 / 32.0


def test_w1_fields_reject_2d():
    grid = Grid((0.0, 0.0), (4, 4), (0.25, 0.25))
    field = DensityField(grid, np.ones((4, 4)))
    with pytest.raises(ValueError):
        wasserstein1_1d(field, field)


STATIC_1D = {
    "grid": {"origin": [0.0], "extent": [1.0], "cells": [16]},
    "mobility": 0.0,
    "initial": {
        "species1": {"kind": "uniform_ball", "center": [0.5], "radius": 0.3, "mass": 1.0},
        "species2": {"kind": "dirac", "location": [0.5], "mass": 1.0},
    },
    "time": {"dt": 0.01, "t_final": 0.05},
}


def test_static_refinement_measures_discretization_error():
    # With zero potentials nothing moves, so the inter-level distances are
    # pure discretization gaps.  The point mass lands half a cell off-center,
    # giving exactly halving distances 2^-6, 2^-7, 2^-8.
    report = refinement_study(parse_config(STATIC_1D), levels=4, mode="successive")
    assert report.dimension == 1
    assert report.mode == "successive"
    assert report.distance_names == ("species1_w1", "species2_w1")
    assert [row.cells for row in report.rows] == [(16,), (32,), (64,)]
    assert [row.dt for row in report.rows] == [0.01, 0.005, 0.0025]
    assert report.distances("species2_w1") == [2.0**-6, 2.0**-7, 2.0**-8]
    assert report.observed_orders("species2_w1") == [1.0, 1.0]
    spread = report.distances("species1_w1")
    assert spread[0] > spread[1] > spread[2] > 0.0


def test_static_refinement_to_finest_mode():
    report = refinement_study(parse_config(STATIC_1D), levels=4, mode="to_finest")
    distances = report.distances("species2_w1")
    # Gaps to the finest center: 7/256, 3/256, 1/256.
    assert distances == [7.0 / 256.0, 3.0 / 256.0, 1.0 / 256.0]
    assert distances[0] / distances[-1] == 7.0


def test_refinement_report_csv():
    report = refinement_study(parse_config(STATIC_1D), levels=2)
    lines = report.to_csv_lines()
    assert lines[0] == "level,cells,min_step,dt,species1_w1,species2_w1"
    assert len(lines) == 2
    assert lines[1].startswith("0,16,0.0625,0.01,")


PROXY_2D = {
    "grid": {"origin": [-0.5, -0.5], "extent": [1.0, 1.0], "cells": [8, 8]},
    "potentials": {"cross": {"kind": "newtonian", "scale": 0.5}},
    "mobility": 0.2,
    "initial": {
        "species1": {"kind": "dirac", "location": [0.0, 0.0], "mass": 1.0},
        "species2": {
            "kind": "uniform_ball",
            "center": [0.15, 0.15],
            "radius": 0.2,
            "normalize": True,
        },
    },
    "time": {"cfl_fraction": 0.9, "t_final": 0.05},
}


def test_refinement_2d_reports_moment_gaps():
    report = refinement_study(parse_config(PROXY_2D), levels=3)
    assert report.dimension == 2
    assert report.distance_names == (
        "mass1_gap",
        "mass2_gap",
        "moment_gap",
        "second_moment_gap",
    )
    assert [row.cells for row in report.rows] == [(8, 8), (16, 16)]
    for name in report.distance_names:
        for value in report.distances(name):
            assert np.isfinite(value) and value >= 0.0
    # The time step follows the CFL budget down with the mesh.
    assert report.rows[1].dt == pytest.approx(report.rows[0].dt / 2, rel=1e-12)


def test_refinement_study_validation():
    config = parse_config(STATIC_1D)
    with pytest.raises(ValueError):
        refinement_study(config, levels=1)
    with pytest.raises(ValueError):
        refinement_study(config, levels=3, mode="sideways")
