import math

import numpy as np
import pytest

from spde_lab.common import (
    AnalyticRule,
    CovarianceModel,
    InvariantViolation,
    ParameterDomainError,
    SpatialGrid,
)
from spde_lab.covariance import (
    bessel_integral,
    covariance_density,
    critical_eta,
    dalang_condition,
    decide_condition,
    lattice_weights,
    spectral_constant,
    spectral_density,
    truncated_integrals,
)
from spde_lab.noise import NoiseSampler


def test_model_parameter_domains():
    with pytest.raises(ParameterDomainError, match=r"\]0,k\["):
        CovarianceModel.riesz(1.5, 1)
    with pytest.raises(ParameterDomainError):
        CovarianceModel.bessel(0.0)
    with pytest.raises(ParameterDomainError, match=r"\]1/2,1\["):
        CovarianceModel.fractional([0.4])
    with pytest.raises(ParameterDomainError):
        CovarianceModel.fractional([0.55, 0.55, 0.55])
    with pytest.raises(ParameterDomainError):
        CovarianceModel.white(0)


def test_spectral_density_values():
    assert spectral_density(CovarianceModel.white(2), [3.0, 4.0]) == 1.0
    riesz = CovarianceModel.riesz(0.5, 1)
    assert spectral_density(riesz, 4.0) == pytest.approx(4.0**-0.5)
    assert math.isinf(spectral_density(riesz, 0.0))
    bessel = CovarianceModel.bessel(2.0, 2)
    assert spectral_density(bessel, [1.0, 1.0]) == pytest.approx(1 / 3)
    values = spectral_density(riesz, np.array([[1.0], [4.0]]))
    assert values.shape == (2,)


def test_spectral_density_rejects_non_finite_frequency():
    with pytest.raises(ParameterDomainError):
        spectral_density(CovarianceModel.white(1), math.nan)


def test_bessel_covariance_closed_form():
    # α = 2, k = 1: ∫ w^{-1/2} e^{-w - 1/(4w)} dw = √π e^{-1}
    model = CovarianceModel.bessel(2.0, 1)
    assert covariance_density(model, 1.0) == pytest.approx(math.sqrt(math.pi) / math.e, rel=1e-7)
    assert bessel_integral(1.0, 2.0, 1) == pytest.approx(math.sqrt(math.pi) / math.e, rel=1e-7)
    # α ≤ k 时原点处奇异
    assert math.isinf(covariance_density(CovarianceModel.bessel(1.0, 2), [0.0, 0.0]))


def test_riesz_and_fractional_covariance():
    assert covariance_density(CovarianceModel.riesz(0.5, 1), 4.0) == pytest.approx(0.5)
    frac = CovarianceModel.fractional([0.75])
    assert covariance_density(frac, 2.0) == pytest.approx(0.375 / math.sqrt(2))
    assert math.isinf(covariance_density(frac, 0.0))


def test_custom_covariance_by_fourier_inversion():
    model = CovarianceModel.custom(lambda xi: 1 / (1 + np.sum(xi**2, axis=-1)), label="cauchy")
    assert covariance_density(model, 1.0) == pytest.approx(math.exp(-1) / 2, rel=1e-6)
    assert critical_eta(model) is None


def test_critical_eta_and_constants():
    assert critical_eta(CovarianceModel.white(1)) == 0.5
    assert critical_eta(CovarianceModel.riesz(0.5, 1)) == 0.25
    assert critical_eta(CovarianceModel.bessel(2.0, 1)) == 0.0
    assert critical_eta(CovarianceModel.fractional([0.75])) == pytest.approx(0.25)
    assert spectral_constant(CovarianceModel.white(1)) == 1.0
    assert spectral_constant(CovarianceModel.bessel(2.0, 1)) == pytest.approx(
        1 / (2 * math.sqrt(math.pi))
    )


def test_lattice_weights():
    grid = SpatialGrid(1, 16, 2.0)
    white = lattice_weights(CovarianceModel.white(1), grid)
    assert np.allclose(white, 0.5)
    riesz = lattice_weights(CovarianceModel.riesz(0.5, 1), grid)
    assert np.all(np.isfinite(riesz))
    assert np.all(riesz > 0)
    half = lattice_weights(CovarianceModel.riesz(0.5, 1), grid, half=True)
    assert half.shape == grid.half_shape
    with pytest.raises(ParameterDomainError):
        lattice_weights(CovarianceModel.white(2), grid)


@pytest.mark.parametrize(
    "model",
    [
        CovarianceModel.white(2),
        CovarianceModel.riesz(0.5, 2),
        CovarianceModel.bessel(2.0, 2),
        CovarianceModel.fractional([0.75, 0.6]),
    ],
)
def test_spectral_density_symmetric(model):
    rng = np.random.default_rng(11)
    xi = rng.uniform(0.1, 5.0, (32, 2)) * rng.choice([-1.0, 1.0], (32, 2))
    forward = spectral_density(model, xi)
    assert np.all(forward > 0)
    assert np.allclose(forward, spectral_density(model, -xi), rtol=1e-14, atol=0)


def test_asymmetric_custom_density_is_rejected():
    grid = SpatialGrid(1, 16, 2.0)
    skewed = CovarianceModel.custom(lambda xi: np.exp(xi[..., 0]))
    with pytest.raises(InvariantViolation, match="对称"):
        lattice_weights(skewed, grid)
    with pytest.raises(InvariantViolation):
        NoiseSampler(grid, skewed, 0.01)
    even = CovarianceModel.custom(lambda xi: np.exp(-np.sum(xi**2, axis=-1)))
    assert lattice_weights(even, grid).shape == grid.shape
    NoiseSampler(grid, even, 0.01)


@pytest.mark.parametrize(
    "model, eta, expected",
    [
        (CovarianceModel.white(1), 1.0, True),
        (CovarianceModel.white(2), 1.0, False),
        (CovarianceModel.riesz(0.5, 1), 0.5, True),
        (CovarianceModel.riesz(0.5, 1), 0.2, False),
        (CovarianceModel.bessel(0.5, 3), 1.0, False),
        (CovarianceModel.bessel(2.0, 3), 1.0, True),
        (CovarianceModel.fractional([0.75, 0.75]), 0.8, True),
    ],
)
def test_condition_verdicts_agree_with_probe(model, eta, expected):
    verdict = decide_condition(model, eta)
    assert verdict.holds is expected
    assert verdict.rule is not AnalyticRule.NumericalOnly
    assert verdict.agrees
    assert len(verdict.values) == 4
    assert verdict.values == sorted(verdict.values)


def test_custom_density_is_decided_numerically():
    model = CovarianceModel.custom(lambda xi: 1 / (1 + np.sum(xi**2, axis=-1)))
    verdict = decide_condition(model, 0.5)
    assert verdict.rule is AnalyticRule.NumericalOnly
    assert verdict.holds


def test_dalang_condition_is_eta_one():
    verdict = dalang_condition(CovarianceModel.riesz(1.5, 2))
    assert verdict.eta == 1.0
    assert verdict.holds


def test_truncated_integrals_white_closed_form():
    # k = 1: 2 ∫_0^R dρ/(1+ρ²) = 2 arctan R
    values = truncated_integrals(CovarianceModel.white(1), 1.0, (1.0, 2.0, 4.0))
    assert values == pytest.approx([2 * math.atan(r) for r in (1.0, 2.0, 4.0)], rel=1e-8)


def test_condition_argument_checks():
    with pytest.raises(ParameterDomainError):
        decide_condition(CovarianceModel.white(1), 0.0)
    with pytest.raises(ParameterDomainError):
        decide_condition(CovarianceModel.white(1), 1.5)
    with pytest.raises(ParameterDomainError):
        decide_condition(CovarianceModel.white(1), 1.0, radii=(16.0, 8.0, 32.0))
