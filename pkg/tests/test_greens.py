import math

import numpy as np
import pytest

from spde_lab.common import (
    OperatorSpecError,
    ParameterDomainError,
    Representation,
    ShapeError,
    SpatialGrid,
    TimeGrid,
)
from spde_lab.greens import (
    CrankNicolsonPropagator,
    SpectralPropagator,
    build_propagator,
    check_operator,
    explicit_euler_matrix,
    expression_operator,
    gaussian_bound_check,
    heat_kernel_eval,
    kernel_increment_check,
    kernel_increment_constant,
    laplacian_operator,
    lattice_heat_kernel,
    semigroup_residual,
    sinusoidal_operator,
    step_diagnostics,
    step_matrix,
)


def test_heat_kernel_values():
    assert heat_kernel_eval(0.25, 0.0) == pytest.approx(1 / math.sqrt(math.pi))
    value = heat_kernel_eval(1.0, [1.0, 0.0], diffusivity=0.5)
    assert value == pytest.approx(math.exp(-0.5) / (2 * math.pi))
    with pytest.raises(ParameterDomainError):
        heat_kernel_eval(0.0, 1.0)


def test_constant_operator_builds_spectral_propagator(heat):
    assert isinstance(heat, SpectralPropagator)
    assert heat.representation is Representation.SpectralMultiplier
    assert np.allclose(heat.mass(4, 0), 1.0)


def test_spectral_delta_response_matches_heat_kernel():
    grid = SpatialGrid(1, 64, 1.0)
    P = build_propagator(laplacian_operator(1), grid, TimeGrid(0.002, 2))
    response = P.delta_response((0,), 1)
    expected = lattice_heat_kernel(grid, 0.001)
    assert np.max(np.abs(response - expected)) < 1e-7


def test_spectral_semigroup_is_exact(heat):
    assert semigroup_residual(heat, 0, 4, 8) <= 1e-12
    assert semigroup_residual(heat, 2, 2, 8) == 0.0


def test_apply_argument_checks(heat):
    with pytest.raises(ShapeError):
        heat.apply(np.ones(8), 1, 0)
    with pytest.raises(ShapeError):
        heat.apply(np.ones(16), 1, 2)


def test_drift_translates_and_decay_damps():
    grid = SpatialGrid(1, 32, 1.0)
    time_grid = TimeGrid(0.1, 4)
    damped = build_propagator(laplacian_operator(1, decay=2.0), grid, time_grid)
    assert np.allclose(damped.mass(4, 0), math.exp(-0.2))
    drifted = build_propagator(laplacian_operator(1, drift=[1.0]), grid, time_grid)
    assert np.allclose(drifted.mass(4, 0), 1.0)
    plain = build_propagator(laplacian_operator(1), grid, time_grid)
    assert not np.allclose(drifted.delta_response((0,), 4), plain.delta_response((0,), 4))


def test_convolve_matches_explicit_sum(heat, rng):
    sources = rng.standard_normal((heat.time_grid.steps, heat.grid.N))
    fast = heat.convolve(sources)
    weights = np.tril(np.ones((heat.time_grid.steps + 1, heat.time_grid.steps)), -1)
    direct = heat.convolve(sources, weights)
    assert np.allclose(fast, direct, atol=1e-12)
    i = 5
    manual = sum(heat.apply(sources[j], i, j) for j in range(i))
    assert np.allclose(fast[i], manual, atol=1e-12)


def test_variable_operator_builds_crank_nicolson(variable_heat):
    assert isinstance(variable_heat, CrankNicolsonPropagator)
    assert variable_heat.representation is Representation.StepOperator
    assert variable_heat.substeps >= 1
    diag = step_diagnostics(variable_heat)
    assert diag.mass_ok
    assert diag.positivity_ok
    assert diag.mass_min == pytest.approx(1.0, abs=1e-10)


def test_crank_nicolson_step_matrix_consistent(variable_heat):
    dense = variable_heat.step_matrix()
    assert np.allclose(dense, step_matrix(variable_heat), atol=1e-12)


def test_crank_nicolson_close_to_fine_explicit_euler(variable_heat):
    reference = explicit_euler_matrix(
        variable_heat.operator, variable_heat.grid, 0.0, variable_heat.dt, 400
    )
    assert np.max(np.abs(variable_heat.step_matrix() - reference)) < 1e-2


def test_crank_nicolson_semigroup_against_refined(variable_heat):
    assert semigroup_residual(variable_heat, 0, 4, 8) < 1e-2


def test_crank_nicolson_requires_dt_below_h():
    grid = SpatialGrid(1, 16, 1.0)
    with pytest.raises(ParameterDomainError):
        build_propagator(sinusoidal_operator(1, 1.0), grid, TimeGrid(1.0, 4))


def test_time_dependent_expression_operator():
    grid = SpatialGrid(1, 16, 1.0)
    op = expression_operator(1, [["1 + 0.25*sin(2*pi*t)"]], rho=0.5)
    assert op.constant is False
    assert op.time_independent is False
    P = build_propagator(op, grid, TimeGrid(0.1, 4))
    assert isinstance(P, CrankNicolsonPropagator)
    assert np.allclose(P.mass(4, 0), 1.0)


def test_check_operator_rejects_non_elliptic(rng):
    grid = SpatialGrid(1, 16, 1.0)
    op = expression_operator(1, [["0.1"]], rho=0.5)
    with pytest.raises(OperatorSpecError):
        check_operator(op, grid, rng)
    with pytest.raises(OperatorSpecError):
        expression_operator(1, [["1", "0"]])
    with pytest.raises(OperatorSpecError):
        laplacian_operator(2, [[1.0, 0.0]])


def test_check_operator_rejects_asymmetric(rng):
    grid = SpatialGrid(2, 8, 1.0)
    op = expression_operator(2, [["1", "0.5"], ["0", "1"]], rho=0.1)
    with pytest.raises(OperatorSpecError, match="不对称"):
        check_operator(op, grid, rng)


def test_gaussian_bound_fits_heat_kernel(heat):
    report = gaussian_bound_check(heat)
    assert report.holds
    assert report.checked_points > 0
    assert report.fitted_constant >= (1 - 1e-6) / math.sqrt(4 * math.pi)
    strict = gaussian_bound_check(heat, constant=0.1)
    assert not strict.holds
    assert strict.violations > 0


def test_kernel_increment_constant():
    closed, numeric = kernel_increment_constant(0.5)
    assert closed == pytest.approx(2 * math.pi)
    assert numeric == pytest.approx(closed, rel=1e-6)
    with pytest.raises(ParameterDomainError):
        kernel_increment_constant(1.0)


def test_kernel_increment_sums():
    grid = SpatialGrid(1, 32, 1.0)
    P = build_propagator(laplacian_operator(1), grid, TimeGrid(0.1, 16))
    report = kernel_increment_check(P, 0.25, [1, 2, 4], direction="time")
    assert report.direction == "time"
    assert len(report.values) == 3
    assert all(v > 0 for v in report.values)
    assert report.values == sorted(report.values)
    assert report.constant == pytest.approx(math.pi / (0.25 * math.sin(math.pi / 4)))
    space = kernel_increment_check(P, 0.25, [1, 2], direction="space")
    assert space.lags == pytest.approx([grid.h, 2 * grid.h])
    with pytest.raises(ParameterDomainError):
        kernel_increment_check(P, 0.25, [1], direction="diagonal")
