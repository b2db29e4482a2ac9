import numpy as np
import pytest

from spde_lab.common import (
    CovarianceModel,
    DegenerateDataError,
    NoiseIncrementField,
    ParameterDomainError,
    ShapeError,
    SpatialGrid,
    TimeGrid,
)
from spde_lab.noise import (
    MAGIC,
    NoiseSampler,
    check_admissible,
    convolution_variance,
    empirical_covariance,
    isometry_check,
    kernel_self_consistency,
    normality_check,
    periodized_covariance,
    read_noise_dump,
    sample_increment,
    sample_path,
    write_noise_dump,
)
from spde_lab.covariance import lattice_weights


def test_white_site_variance_is_dt_over_h(grid, white):
    dt = 0.01
    assert periodized_covariance(grid, white, dt, 0) == pytest.approx(dt / grid.h, rel=1e-12)
    # 白噪声在非零格点位移上不相关
    assert periodized_covariance(grid, white, dt, 3) == pytest.approx(0.0, abs=1e-12)


def test_sampler_reproducible_and_shaped(grid, white, time_grid):
    a = sample_path(grid, white, time_grid, np.random.default_rng(3))
    b = sample_path(grid, white, time_grid, np.random.default_rng(3))
    assert a.shape == (time_grid.steps, grid.N)
    assert np.array_equal(a, b)
    field = sample_increment(grid, white, 0.01, np.random.default_rng(3))
    assert isinstance(field, NoiseIncrementField)
    assert field.values.shape == grid.shape


def test_sampler_matches_lattice_covariance(rng):
    grid = SpatialGrid(1, 16, 2.0)
    model = CovarianceModel.riesz(0.5, 1)
    dt = 0.05
    samples = NoiseSampler(grid, model, dt).sample(rng, 4000)
    for lag in (0, 1, 3):
        estimate, se = empirical_covariance(samples, lag)
        reference = periodized_covariance(grid, model, dt, lag)
        assert abs(estimate - reference) <= 4 * se


def test_empirical_covariance_from_fields(grid, white, rng):
    fields = [sample_increment(grid, white, 0.01, rng) for _ in range(500)]
    estimate, se = empirical_covariance(fields, 0)
    assert abs(estimate - 0.01 / grid.h) <= 4 * se
    with pytest.raises(DegenerateDataError):
        empirical_covariance([], 0)
    with pytest.raises(ShapeError):
        empirical_covariance(fields, (0, 1))


def test_normality_of_site_marginal(grid, white, rng):
    samples = NoiseSampler(grid, white, 0.01).sample(rng, 4000)
    result = normality_check(samples, 0)
    assert result.n == 4000
    assert result.passes(n_se=4.0)


def test_isometry_constant_integrand(rng):
    grid = SpatialGrid(1, 8, 1.0)
    time_grid = TimeGrid(0.5, 4)
    model = CovarianceModel.white(1)
    result = isometry_check(lambda t, x: 1.0, model, grid, time_grid, 2000, rng)
    # ∫∫ 1 dW 的方差为 T · L
    assert result.analytic_variance == pytest.approx(0.5, rel=1e-12)
    assert result.n_samples == 2000
    assert abs(result.mc_variance - result.analytic_variance) <= 4 * result.standard_error


def test_isometry_rejects_unbounded_integrand(rng):
    grid = SpatialGrid(1, 8, 1.0)
    time_grid = TimeGrid(0.5, 4)
    integrand = np.full((4, 8), np.inf)
    with pytest.raises(ShapeError):
        isometry_check(integrand, CovarianceModel.white(1), grid, time_grid, 10, rng)


def test_convolution_variance_single_term(grid, white):
    weights = lattice_weights(white, grid)
    gain = np.ones(grid.shape)
    assert convolution_variance(weights, gain, 0.1, [1]) == pytest.approx(0.1 / grid.h)
    assert convolution_variance(weights, gain, 0.1, [1, 2], [2.0, 0.0]) == pytest.approx(
        0.4 / grid.h
    )


def test_check_admissible():
    check_admissible(CovarianceModel.white(3))
    check_admissible(CovarianceModel.bessel(2.0, 3))
    with pytest.raises(ParameterDomainError):
        check_admissible(CovarianceModel.bessel(0.5, 3))
    with pytest.raises(ParameterDomainError):
        NoiseSampler(SpatialGrid(1, 8, 1.0), CovarianceModel.white(1), 0.0)


def test_kernel_self_consistency_bessel():
    grid = SpatialGrid(1, 256, 16.0)
    rows = kernel_self_consistency(CovarianceModel.bessel(2.0, 1), grid, [8, 16])
    assert [row["x"] for row in rows] == pytest.approx([0.5, 1.0])
    for row in rows:
        assert row["relative_error"] < 0.05


def test_kernel_self_consistency_fractional_improves_with_box():
    model = CovarianceModel.fractional([0.75])
    errors = []
    for L in (16.0, 64.0, 256.0):
        # h = 1/16 固定，只增大周期盒
        grid = SpatialGrid(1, int(16 * L), L)
        rows = kernel_self_consistency(model, grid, [16, 32])
        assert [row["x"] for row in rows] == pytest.approx([1.0, 2.0])
        errors.append([row["relative_error"] for row in rows])
    errors = np.array(errors)
    assert np.all(np.diff(errors, axis=0) < 0)
    assert np.all(errors[-1] < 0.015)


def test_independence_in_time(rng):
    grid = SpatialGrid(1, 16, 2.0)
    model = CovarianceModel.riesz(0.5, 1)
    time_grid = TimeGrid(0.4, 4)
    paths = np.stack([sample_path(grid, model, time_grid, rng) for _ in range(2000)])
    same, same_se = empirical_covariance(paths[:, 0], 0)
    assert same > 10 * same_se
    estimate, se = empirical_covariance(paths[:, 0], 0, other=paths[:, 2])
    assert abs(estimate) <= 3 * se
    estimate, se = empirical_covariance(paths[:, 1], 1, other=paths[:, 3])
    assert abs(estimate) <= 3 * se
    with pytest.raises(ShapeError):
        empirical_covariance(paths[:, 0], 0, other=paths[:10, 1])


def test_noise_dump_round_trip(tmp_path, grid, white, rng):
    fields = NoiseSampler(grid, white, 0.01).sample(rng, 3)
    path = tmp_path / "noise.bin"
    size = write_noise_dump(path, fields, grid, 0.01)
    assert size == 32 + 8 * 3 * grid.N
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    header, data = read_noise_dump(path)
    assert header == {"k": 1, "N": grid.N, "dt": 0.01, "count": 3}
    assert np.array_equal(data, fields)


def test_noise_dump_single_field_and_errors(tmp_path, grid):
    path = tmp_path / "one.bin"
    write_noise_dump(path, np.zeros(grid.shape), grid, 0.5)
    header, data = read_noise_dump(path)
    assert header["count"] == 1
    assert data.shape == (1, grid.N)
    with pytest.raises(ShapeError):
        write_noise_dump(path, np.zeros((2, 5)), grid, 0.5)
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTNOISE" + path.read_bytes()[8:])
    with pytest.raises(ShapeError):
        read_noise_dump(bad)
    short = tmp_path / "short.bin"
    short.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ShapeError):
        read_noise_dump(short)
