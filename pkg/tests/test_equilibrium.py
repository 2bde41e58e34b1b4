"""Signature-function projection: moment identities and grid invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinetic_hydro import (
    VelocityGrid,
    burgers,
    linear,
    chi_pointwise,
    flux_moment,
    project_equilibrium,
    project_equilibrium_field,
    zeroth_moment,
)
from kinetic_hydro.errors import OutOfRangeError


def ulp_tol(*values, n=4):
    return n * np.spacing(max(1.0, *[abs(v) for v in values]))


# ---------------------------------------------------------------- grid


def test_grid_requires_zero_on_edge():
    VelocityGrid(-1.0, 1.0, 10)            # dv = 0.2, edge at 0
    VelocityGrid(-0.4, 1.0, 7)             # dv = 0.2, edge at 0
    with pytest.raises(ValueError):
        VelocityGrid(-0.5, 1.0, 10)        # dv = 0.15, no edge at 0
    with pytest.raises(ValueError):
        VelocityGrid(0.5, 1.0, 4)          # does not straddle 0


def test_grid_geometry():
    grid = VelocityGrid(-1.0, 1.0, 8)
    assert grid.dv == pytest.approx(0.25)
    assert grid.zero_index == 4
    assert grid.edges[4] == 0.0
    assert grid.centers[0] == pytest.approx(-0.875)


# ---------------------------------------------------------------- chi


@pytest.mark.parametrize("u,v,expected", [
    (2.0, 0.5, 1),
    (-1.5, -1.0, -1),
    (0.3, 0.7, 0),
    (0.0, 0.2, 0),
    (0.0, -0.2, 0),
    (1.0, 1.0, 1),      # closed at v = u
    (-1.0, -1.0, -1),
])
def test_chi_pointwise(u, v, expected):
    assert chi_pointwise(u, v) == expected


# ---------------------------------------------------------------- projection


def test_projection_sharp_cells_positive():
    grid = VelocityGrid(-1.0, 1.0, 10)      # dv = 0.2
    slc = project_equilibrium(0.5, grid)
    vals = slc.values
    # cells (0, 0.2] and (0.2, 0.4] full, (0.4, 0.6] holds the fraction
    assert vals[grid.zero_index] == 1.0
    assert vals[grid.zero_index + 1] == 1.0
    assert vals[grid.zero_index + 2] == pytest.approx(0.5)
    assert np.all(vals[:grid.zero_index] == 0.0)
    assert np.all(vals[grid.zero_index + 3:] == 0.0)
    assert slc.moment() == pytest.approx(0.5, abs=ulp_tol(0.5))


def test_projection_sharp_cells_negative():
    grid = VelocityGrid(-1.0, 1.0, 10)
    vals = project_equilibrium(-0.3, grid).values
    assert vals[grid.zero_index - 1] == -1.0            # [-0.2, 0)
    assert vals[grid.zero_index - 2] == pytest.approx(-0.5)
    assert np.all(vals[grid.zero_index:] == 0.0)
    assert zeroth_moment(vals, grid) == pytest.approx(-0.3, abs=ulp_tol(0.3))


def test_projection_zero_is_empty():
    grid = VelocityGrid(-1.0, 1.0, 10)
    assert np.all(project_equilibrium(0.0, grid).values == 0.0)


def test_projection_out_of_range():
    grid = VelocityGrid(-1.0, 1.0, 10)
    with pytest.raises(OutOfRangeError):
        project_equilibrium(1.5, grid)
    with pytest.raises(OutOfRangeError):
        project_equilibrium_field(np.array([0.0, -1.2]), grid)


def test_field_projection_matches_scalar():
    grid = VelocityGrid(-2.0, 2.0, 16)
    w = np.array([-1.7, -0.3, 0.0, 0.4, 1.9])
    field = project_equilibrium_field(w, grid)
    for i, u in enumerate(w):
        assert np.array_equal(field[i], project_equilibrium(u, grid).values)


# ---------------------------------------------------------------- moments


def test_zeroth_moment_direct_sum():
    grid = VelocityGrid(-1.0, 1.0, 8)       # dv = 0.25
    assert zeroth_moment(np.ones(8), grid) == pytest.approx(2.0)
    assert zeroth_moment(np.zeros(8), grid) == 0.0


def test_zeroth_moment_length_mismatch():
    grid = VelocityGrid(-1.0, 1.0, 8)
    with pytest.raises(ValueError):
        zeroth_moment(np.ones(7), grid)


def test_flux_moment_burgers_telescopes():
    # edges at 0 and 1.0 exactly: full cells telescope to A(1) - A(0)
    grid = VelocityGrid(-1.0, 1.0, 10)
    slc = project_equilibrium(1.0, grid)
    assert flux_moment(slc, grid, burgers()) == 0.5


def test_flux_moment_linear_is_scaled_moment():
    grid = VelocityGrid(-1.0, 1.0, 16)
    rng = np.random.default_rng(7)
    g = rng.uniform(-1.0, 1.0, 16)
    c = 1.5
    got = flux_moment(g, grid, linear(c))
    assert got == pytest.approx(c * zeroth_moment(g, grid), abs=1e-14)


def test_flux_moment_zero_slice():
    grid = VelocityGrid(-1.0, 1.0, 16)
    assert flux_moment(np.zeros(16), grid, burgers()) == 0.0


def test_flux_moment_quadratic_refinement():
    # fractional-cell error of flux_moment vs A(u) - A(0) decays at O(dv^2)
    flux = burgers()
    u = 0.437
    errs = []
    for n in (16, 32, 64, 128):
        grid = VelocityGrid(-1.0, 1.0, n)
        err = abs(flux_moment(project_equilibrium(u, grid), grid, flux)
                  - (flux.A(u) - flux.A(0.0)))
        errs.append(err)
    slopes = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    assert np.mean(slopes) >= 1.9


# ---------------------------------------------------------------- properties

GRID = VelocityGrid(-2.0, 2.5, 18)          # deliberately asymmetric
densities = st.floats(min_value=-2.0, max_value=2.0,
                      allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(u=densities)
def test_moment_identity(u):
    got = zeroth_moment(project_equilibrium(u, GRID).values, GRID)
    assert abs(got - u) <= ulp_tol(u)


@settings(max_examples=200, deadline=None)
@given(u1=densities, u2=densities)
def test_projection_monotone(u1, u2):
    lo, hi = min(u1, u2), max(u1, u2)
    a = project_equilibrium(lo, GRID).values
    b = project_equilibrium(hi, GRID).values
    assert np.all(a <= b + np.spacing(1.0))


@settings(max_examples=200, deadline=None)
@given(u1=densities, u2=densities)
def test_l1_difference_identity(u1, u2):
    a = project_equilibrium(u1, GRID).values
    b = project_equilibrium(u2, GRID).values
    got = np.sum(np.abs(a - b)) * GRID.dv
    assert abs(got - abs(u1 - u2)) <= ulp_tol(u1, u2)


@settings(max_examples=200, deadline=None)
@given(u=densities)
def test_slice_structure(u):
    vals = project_equilibrium(u, GRID).values
    if u >= 0:
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    else:
        assert np.all(vals <= 0.0) and np.all(vals >= -1.0)
    fractional = (np.abs(vals) > 0.0) & (np.abs(vals) < 1.0)
    assert np.count_nonzero(fractional) <= 1
