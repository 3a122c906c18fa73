import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscitrace import (
    MeasureGrid,
    StableScaleDensity,
    adaptive_simpson,
    aggregate_measure,
    harmonic_closed_form,
    laplace_transform,
    levy_density,
    mode_measure,
    pollard_density,
    stable_series_density,
    stable_tail_mass,
)


def test_levy_density_example():
    assert_allclose(levy_density(1.0, 1.0), math.exp(-0.25) / (2.0 * math.sqrt(math.pi)),
                    rtol=1e-14)
    assert levy_density(1.0, -1.0) == 0.0
    assert levy_density(3.0, 1e-6) == 0.0  # essential zero underflows cleanly


def test_levy_normalization():
    # substitute lam = a^2/(4 w): mass becomes a Gaussian integral; here we
    # integrate numerically with the smooth substitution lam = v^2
    a = 1.0
    mass = adaptive_simpson(lambda v: 2.0 * v * levy_density(a, v * v), 0.0, 30.0, 1e-11)
    mass += stable_tail_mass(0.5, a, 900.0)
    assert_allclose(mass, 1.0, atol=1e-9)


def test_levy_laplace_example():
    mode = StableScaleDensity(alpha=0.5, a=1.0)
    assert_allclose(mode.laplace(1.0), math.exp(-1.0), atol=1e-9)


def test_pollard_matches_levy_closed_form():
    for lam in np.geomspace(0.01, 100.0, 17):
        diff = abs(pollard_density(0.5, 1.0, float(lam)) - levy_density(1.0, float(lam)))
        assert diff <= 1e-8


def test_pollard_validation():
    with pytest.raises(ValueError):
        pollard_density(1.2, 1.0, 1.0)
    with pytest.raises(ValueError):
        pollard_density(0.5, -1.0, 1.0)
    with pytest.raises(ValueError):
        pollard_density(0.5, 1.0, 0.0)


def test_series_matches_levy():
    for lam in (2.0, 5.0, 20.0, 200.0):
        assert_allclose(
            stable_series_density(0.5, 1.0, lam), levy_density(1.0, lam), rtol=1e-12
        )


def test_series_matches_pollard_other_alpha():
    for alpha in (1.0 / 3.0, 2.0 / 3.0):
        for lam in (3.0, 8.0, 40.0):
            assert_allclose(
                stable_series_density(alpha, 1.0, lam),
                pollard_density(alpha, 1.0, lam, abs_tol=1e-13),
                rtol=1e-7,
                atol=1e-13,
            )


@pytest.mark.parametrize("alpha", [1.0 / 3.0, 2.0 / 3.0])
def test_stable_normalization(alpha):
    # cancellation-dominated left tail (alpha > 1/2 only) carries mass far
    # below the tolerance: the density rises monotonically to its peak, so
    # the omitted piece is under lo * density(lo) ~ 1e-60 at lo = 0.01
    mode = StableScaleDensity(alpha=alpha, a=1.0)
    lo = 0.0 if alpha < 0.5 else 0.01
    mass = adaptive_simpson(
        lambda l: mode.density(l, abs_tol=1e-12), lo, 30.0, 1e-9, noise=1e-11
    )
    mass += stable_tail_mass(alpha, 1.0, 30.0)
    assert_allclose(mass, 1.0, atol=1e-8)


@pytest.mark.parametrize(
    "alpha, a",
    [(0.5, 1.0), (0.5, 5.0), (1.0 / 3.0, 1.060362)],
)
def test_mode_round_trip(alpha, a):
    mode = StableScaleDensity(alpha=alpha, a=a)
    for t in (0.25, 1.0, 4.0):
        assert abs(mode.laplace(t) - math.exp(-a * t**alpha)) <= 1e-8


def test_round_trip_rho_one_family():
    # rho = 1 corresponds to alpha = 2/3
    mode = StableScaleDensity(alpha=2.0 / 3.0, a=1.0)
    assert abs(mode.laplace(1.0) - math.exp(-1.0)) <= 1e-8


def test_densities_positive_on_grid():
    grid = np.geomspace(0.05, 50.0, 40)
    for mode in (StableScaleDensity(0.5, 2.0), StableScaleDensity(1.0 / 3.0, 1.0)):
        vals = mode.density_grid(grid)
        assert np.all(vals > 0.0)


def test_mode_measure_examples():
    m0 = mode_measure(1.0, 2.0)
    assert (m0.alpha, m0.a) == (0.5, 1.0)
    m2 = mode_measure(5.0, 2.0)
    assert (m2.alpha, m2.a) == (0.5, 5.0)
    mq = mode_measure(1.060362, 4.0)
    assert_allclose(mq.alpha, 1.0 / 3.0)
    with pytest.raises(ValueError):
        mode_measure(-1.0, 2.0)


def test_aggregate_measure_and_parity_partition():
    modes = [mode_measure(2 * n + 1.0, 2.0) for n in range(12)]
    grid = np.geomspace(0.05, 30.0, 200)
    full = aggregate_measure(modes, grid)
    even = aggregate_measure(modes[0::2], grid)
    odd = aggregate_measure(modes[1::2], grid)
    assert_allclose(even.density_values + odd.density_values, full.density_values,
                    rtol=1e-13)
    at_one = sum(levy_density(2 * n + 1.0, 1.0) for n in range(12))
    idx = int(np.argmin(np.abs(grid - 1.0)))
    assert_allclose(
        full.density_values[idx],
        sum(levy_density(2 * n + 1.0, float(grid[idx])) for n in range(12)),
        rtol=1e-12,
    )
    assert at_one > 0


def test_aggregate_empty_and_cutoff():
    grid = np.geomspace(0.1, 10.0, 50)
    empty = aggregate_measure([], grid)
    assert np.all(empty.density_values == 0.0)
    modes = [mode_measure(2 * n + 1.0, 2.0) for n in range(6)]
    cut = aggregate_measure(modes, grid, mode_cutoff=3)
    assert "3 listed modes omitted" in cut.truncation_note
    with pytest.raises(ValueError):
        aggregate_measure(modes, grid, mode_cutoff=7)


def test_aggregate_omitted_bound_is_certified():
    modes = [mode_measure(2 * n + 1.0, 2.0) for n in range(8)]
    grid = np.geomspace(0.1, 20.0, 300)
    cut = aggregate_measure(modes, grid, mode_cutoff=4)
    full = aggregate_measure(modes, grid)
    omitted = full.density_values - cut.density_values
    bound = float(cut.truncation_note.split("<= ")[1].split(";")[0])
    assert np.all(omitted <= bound * (1 + 1e-12))


def test_laplace_transform_atoms_only():
    grid = MeasureGrid(
        lambdas=np.array([]),
        density_values=np.array([]),
        atoms=((1.0, 1.0), (2.0, 1.0)),
        truncation_note="",
    )
    assert_allclose(laplace_transform(grid, 1.0), math.exp(-1) + math.exp(-2), rtol=1e-15)


def test_laplace_transform_single_mode_grid():
    mode = StableScaleDensity(alpha=0.5, a=1.0)
    lams = np.geomspace(1e-4, 60.0, 40000)
    grid = aggregate_measure([mode], lams)
    assert abs(laplace_transform(grid, 4.0) - math.exp(-2.0)) <= 1e-7


def test_harmonic_aggregate_reproduces_trace():
    modes = [mode_measure(2 * n + 1.0, 2.0) for n in range(40)]
    grid = np.geomspace(1e-3, 60.0, 30000)
    mg = aggregate_measure(modes, grid)
    value = laplace_transform(mg, 1.0)
    assert abs(value - harmonic_closed_form(1.0)[0]) <= 1e-6


def test_measure_grid_validation():
    with pytest.raises(ValueError):
        MeasureGrid(np.array([1.0, 0.5]), np.array([0.1, 0.1]), (), "")
    with pytest.raises(ValueError):
        MeasureGrid(np.array([0.5, 1.0]), np.array([-0.1, 0.1]), (), "")
    with pytest.raises(ValueError):
        MeasureGrid(np.array([0.5, 1.0]), np.array([0.1, 0.1]), ((1.0, -2.0),), "")
