import math

import numpy as np
import pytest

from spde_lab.common import (
    ConfigError,
    CovarianceModel,
    FactorizationConfig,
    ParameterDomainError,
    ShapeError,
)
from spde_lab.factorization import (
    beta_quadrature,
    beta_weight,
    compute_Y_delta,
    default_config,
    direct_convolution,
    product_weights,
    reconstruct,
    round_trip,
    y_delta_weights,
)
from spde_lab.noise import sample_path


@pytest.mark.parametrize("delta", [0.1, 0.25, 0.3, 0.45])
def test_beta_identity(delta):
    closed = math.pi / math.sin(math.pi * delta)
    assert beta_weight(1.0, delta) == pytest.approx(closed)
    assert beta_weight(7.5, delta) == beta_weight(0.2, delta)
    assert beta_quadrature(delta) == pytest.approx(closed, rel=1e-8)
    assert beta_quadrature(delta, t=2.5) == pytest.approx(closed, rel=1e-8)


def test_beta_argument_checks():
    with pytest.raises(ParameterDomainError):
        beta_weight(0.0, 0.25)
    with pytest.raises(ParameterDomainError):
        beta_weight(1.0, 1.0)
    with pytest.raises(ParameterDomainError):
        beta_quadrature(0.0)


@pytest.mark.parametrize("rule", ["left", "right"])
def test_product_weights_integrate_exactly(time_grid, rule):
    delta = 0.25
    weights = product_weights(time_grid.times, delta, rule)
    assert weights.shape == (time_grid.steps + 1, time_grid.steps + 1)
    assert np.all(weights >= 0)
    assert np.allclose(weights.sum(axis=1), time_grid.times**delta / delta)
    assert not weights[0].any()


def test_product_weight_supports():
    times = np.linspace(0.0, 1.0, 5)
    left = product_weights(times, 0.3, "left")
    right = product_weights(times, 0.3, "right")
    assert not np.any(np.triu(left))
    assert not right[:, 0].any()
    assert not np.any(np.triu(right, 1))
    with pytest.raises(ConfigError):
        product_weights(times, 0.3, "midpoint")


def test_y_delta_weights(time_grid):
    weights = y_delta_weights(time_grid.times, 0.2)
    assert weights.shape == (time_grid.steps + 1, time_grid.steps)
    assert not np.any(np.triu(weights))
    assert weights[3, 1] == pytest.approx((2 * time_grid.dt) ** -0.2)


def test_single_source_reconstruction_right_rule(heat, grid):
    cfg = FactorizationConfig(delta=0.25, eta=0.4, rule="right")
    steps = heat.time_grid.steps
    noise = np.zeros((steps, grid.N))
    noise[0, 5] = 1.0
    Z = np.ones((steps + 1, grid.N))
    Y = compute_Y_delta(heat, Z, noise, cfg)
    spread = heat.apply(noise[0], 3, 0)
    assert np.allclose(Y[3], heat.time_grid.times[3] ** -0.25 * spread)
    assert not Y[0].any()

    direct = direct_convolution(heat, Z, noise)
    rebuilt = reconstruct(heat, Y, cfg)
    factor = math.sin(math.pi * 0.25) / (math.pi * 0.25)
    assert np.allclose(rebuilt[1], factor * direct[1])
    first = np.linalg.norm(rebuilt[1] - direct[1]) / np.linalg.norm(direct[1])
    last = np.linalg.norm(rebuilt[steps] - direct[steps]) / np.linalg.norm(direct[steps])
    assert last < first


def test_one_step_toy_left_rule(heat, grid):
    cfg = FactorizationConfig(delta=0.25, eta=0.4)
    assert cfg.rule == "left"
    steps = heat.time_grid.steps
    Y = np.zeros((steps + 1, grid.N))
    Y[0, 5] = 1.0
    rebuilt = reconstruct(heat, Y, cfg)
    weight = heat.dt**0.25 / 0.25
    expected = math.sin(math.pi * 0.25) / math.pi * weight * heat.apply(Y[0], 1, 0)
    assert np.allclose(rebuilt[1], expected, rtol=1e-10, atol=1e-14)
    assert not rebuilt[0].any()
    # right 规则从 j = 1 开始，Y(t_0) 不参与重构
    right = reconstruct(heat, Y, FactorizationConfig(delta=0.25, eta=0.4, rule="right"))
    assert not right.any()


def test_round_trip_on_white_noise(heat, white, grid):
    cfg = default_config(white, rule="right")
    noise = np.stack(
        [sample_path(grid, white, heat.time_grid, np.random.default_rng(s)) for s in range(4)]
    )
    Z = np.ones((heat.time_grid.steps, grid.N))
    error = round_trip(heat, Z, noise, cfg)
    assert 0 < error < 0.2
    assert round_trip(heat, Z, np.zeros_like(noise), cfg) == 0.0


def test_shape_checks(heat, grid):
    cfg = FactorizationConfig(delta=0.2, eta=0.5)
    steps = heat.time_grid.steps
    noise = np.zeros((steps, grid.N))
    with pytest.raises(ShapeError):
        compute_Y_delta(heat, np.ones((steps - 1, grid.N)), noise, cfg)
    with pytest.raises(ShapeError):
        compute_Y_delta(heat, np.full((steps, grid.N), np.inf), noise, cfg)
    with pytest.raises(ShapeError):
        reconstruct(heat, np.zeros((steps, grid.N)), cfg)


def test_default_config():
    cfg = default_config(CovarianceModel.white(1))
    assert cfg.eta == pytest.approx(0.525)
    assert cfg.delta == pytest.approx(0.21375)
    assert cfg.rule == "left"
    riesz = default_config(CovarianceModel.riesz(0.5, 1), rule="right")
    assert riesz.eta == pytest.approx(0.25 + 0.05 * 0.75)
    assert riesz.rule == "right"
    custom = CovarianceModel.custom(lambda xi: 1 / (1 + np.sum(xi**2, axis=-1)))
    with pytest.raises(ConfigError):
        default_config(custom)
    assert default_config(custom, eta=0.6).delta == pytest.approx(0.18)
    with pytest.raises(ConfigError):
        default_config(CovarianceModel.white(1), eta=0.3)


@pytest.mark.parametrize(
    "delta, eta, rule",
    [(0.3, 0.6, "right"), (0.0, 0.5, "right"), (0.1, 1.0, "right"), (0.1, 0.5, "midpoint")],
)
def test_invalid_factorization_config(delta, eta, rule):
    with pytest.raises(ConfigError):
        FactorizationConfig(delta=delta, eta=eta, rule=rule)
