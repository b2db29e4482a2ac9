import numpy as np
import pytest

from spde_lab.common import (
    ConfigError,
    CovarianceModel,
    DegenerateDataError,
    Direction,
    ParameterDomainError,
    SolutionField,
    SpatialGrid,
    TimeGrid,
)
from spde_lab.noise import NoiseSampler
from spde_lab.regularity import (
    anchor_policy,
    dyadic_lags,
    fit_exponents,
    increment_moments,
    lag_steps,
    linear_increment_variance,
    plot_table,
    secant_slopes,
    table_from_rows,
    theoretical_targets,
)
from spde_lab.solver import euler_march, make_coefficients

GRID = SpatialGrid(1, 16, 1.0)
TIMES = TimeGrid(1.0, 64)


def linear_paths(slopes=(1.0, 2.0, 3.0)) -> list[SolutionField]:
    """u(t, x) = c t，与 x 无关。"""
    ramp = TIMES.times[:, None] * np.ones(GRID.shape)
    return [SolutionField(GRID, TIMES, c * ramp, seed=n) for n, c in enumerate(slopes)]


def test_dyadic_lags():
    assert dyadic_lags(0.25, 16.0) == [0.25, 0.5, 1.0, 2.0]
    assert dyadic_lags(1 / 64, 1.0) == [1 / 64, 1 / 32, 1 / 16, 1 / 8]
    assert dyadic_lags(1.0, 4.0) == []


def test_lag_steps():
    assert lag_steps([1 / 64, 1 / 16], Direction.Time, GRID, TIMES) == [1, 4]
    assert lag_steps([0.125], Direction.Space, GRID, TIMES) == [2]
    with pytest.raises(ConfigError, match="dt"):
        lag_steps([0.01], Direction.Time, GRID, TIMES)
    with pytest.raises(ConfigError):
        lag_steps([0.1], Direction.Space, GRID, TIMES)
    with pytest.raises(ConfigError):
        lag_steps([1.0], Direction.Space, GRID, TIMES)


def test_anchor_policy():
    anchors = anchor_policy(64, 1 / 64, GRID.shape, 8, Direction.Time)
    assert anchors["burn_in"] == pytest.approx(0.5)
    assert anchors["times"][0] == 32
    assert anchors["times"][-1] == 56
    assert len(anchors["sites"]) == 16
    assert anchors["sites"][0] == [0]
    with pytest.raises(ConfigError):
        anchor_policy(8, 1 / 8, GRID.shape, 8, Direction.Time)


def test_time_increments_of_linear_paths():
    lags = dyadic_lags(TIMES.dt, TIMES.T)
    table = increment_moments(linear_paths(), 2.0, Direction.Time, lags)
    assert table.n_paths == 3
    assert table.unit == TIMES.dt
    assert table.extent == TIMES.T
    assert np.allclose(table.moments, 14 / 3 * np.asarray(lags) ** 2)
    assert np.all(table.standard_errors > 0)

    report = fit_exponents(table, target=1.0, provenance="linear", window=(1 / 64, 1 / 8))
    fit = report.fits["time"]
    assert fit.gamma == pytest.approx(1.0, abs=1e-9)
    assert fit.slope == pytest.approx(2.0, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
    assert fit.n_lags == 4
    assert fit.weighted
    assert fit.ci[0] <= fit.gamma <= fit.ci[1]
    assert not report.flagged
    assert report.targets == {"time": 1.0}
    assert report.config["time_n_paths"] == 3

    slopes, errors = secant_slopes(table)
    assert np.allclose(slopes, 1.0)
    assert np.all(errors >= 0)
    assert plot_table(table).shape == (4, 3)


def test_baseline_is_subtracted():
    lags = dyadic_lags(TIMES.dt, TIMES.T)
    baseline = linear_paths((1.0,))[0].values
    table = increment_moments(linear_paths(), 2.0, Direction.Time, lags, baseline=baseline)
    assert np.allclose(table.moments, 5 / 3 * np.asarray(lags) ** 2)


def test_default_window_needs_enough_lags():
    lags = dyadic_lags(TIMES.dt, TIMES.T)
    table = increment_moments(linear_paths(), 2.0, Direction.Time, lags)
    # 默认窗口 [4 dt, T/8] 只含两个步长
    with pytest.raises(DegenerateDataError):
        fit_exponents(table)
    with pytest.raises(DegenerateDataError):
        fit_exponents(table, window=(1 / 32, 1 / 8))


def test_increment_argument_checks():
    paths = linear_paths()
    with pytest.raises(ParameterDomainError):
        increment_moments(paths, 1.5, Direction.Time, [1 / 64])
    with pytest.raises(ParameterDomainError):
        increment_moments(paths[:1], 2.0, Direction.Time, [1 / 64])


def test_space_table_and_batches(rng):
    values = rng.standard_normal((5, TIMES.steps + 1, GRID.N))
    paths = [SolutionField(GRID, TIMES, v) for v in values]
    table = increment_moments(paths, 2.0, Direction.Space, [GRID.h, 2 * GRID.h])
    assert table.direction is Direction.Space
    assert table.unit == GRID.h
    assert table.extent == GRID.L
    # 独立标准正态的差的二阶矩为 2
    assert np.all(np.abs(table.moments - 2.0) < 1.0)

    rows = np.array([[1.0, 4.0], [2.0, 5.0], [3.0, 6.0]])
    summary = table_from_rows(rows, 2.0, Direction.Time, [0.1, 0.2], 0.1, 1.0, {})
    assert np.allclose(summary.moments, [2.0, 5.0])
    assert np.allclose(summary.standard_errors, 1 / np.sqrt(3))


def test_theoretical_targets():
    targets, provenance = theoretical_targets(CovarianceModel.white(1))
    assert targets == {"time": 0.25, "space": 0.5}
    assert provenance == "η*=0.5"
    targets, provenance = theoretical_targets(CovarianceModel.riesz(0.5, 1))
    assert targets["time"] == pytest.approx(0.375)
    assert targets["space"] == pytest.approx(0.75)
    assert provenance == "β=0.5"
    custom = CovarianceModel.custom(lambda xi: np.ones(xi.shape[:-1]))
    assert theoretical_targets(custom) == ({}, "numerical-only")


def test_linear_increment_variance_matches_monte_carlo(heat, white, grid, rng):
    steps = heat.time_grid.steps
    count = 4000
    noise = NoiseSampler(grid, white, heat.dt).sample(rng, count * steps)
    values = euler_march(heat, make_coefficients(), np.zeros(grid.shape), noise.reshape(count, steps, grid.N))
    assert linear_increment_variance(heat, white, 5, 0, Direction.Space) == 0.0

    increments = values[:, 7, 0] - values[:, 5, 0]
    expected = linear_increment_variance(heat, white, 5, 2, Direction.Time)
    estimate = float(np.mean(increments**2))
    se = estimate * np.sqrt(2 / (count - 1))
    assert abs(estimate - expected) <= 4 * se

    spatial = values[:, 6, 2] - values[:, 6, 0]
    expected = linear_increment_variance(heat, white, 6, 2, Direction.Space)
    estimate = float(np.mean(spatial**2))
    se = estimate * np.sqrt(2 / (count - 1))
    assert abs(estimate - expected) <= 4 * se
