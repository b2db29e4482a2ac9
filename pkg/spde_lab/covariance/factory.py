import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import (  # type: ignore
    CovarianceKind,
    CovarianceModel,
    InvariantViolation,
    ParameterDomainError,
)
from .bessel import BesselCovariance
from .custom import CustomSpectralCovariance
from .fractional import FractionalCovariance
from .geometry import as_points
from .riesz import RieszCovariance
from .white import WhiteCovariance


def create_covariance(model: CovarianceModel) -> CovarianceBase:
    """按协方差族创建对应的实现"""
    if model.kind is CovarianceKind.White:
        return WhiteCovariance(model)
    elif model.kind is CovarianceKind.Riesz:
        return RieszCovariance(model)
    elif model.kind is CovarianceKind.Bessel:
        return BesselCovariance(model)
    elif model.kind is CovarianceKind.Fractional:
        return FractionalCovariance(model)
    elif model.kind is CovarianceKind.CustomSpectral:
        return CustomSpectralCovariance(model)
    raise ParameterDomainError(f"未知的协方差族: {model.kind}")


def _scalar_or_array(values: np.ndarray, single: bool):
    return float(values) if single else values


def spectral_density(model: CovarianceModel, xi) -> float | np.ndarray:
    """
    谱测度 μ 在 ξ 处的密度 (单位常数约定)。

    Args:
        model (CovarianceModel): 协方差模型。
        xi: 单个频率向量，或形状为 (..., k) 的频率数组。

    Returns:
        float | np.ndarray: 密度值，只在奇异频率处为 +inf。
    """
    points, single = as_points(xi, model.k)
    if not np.all(np.isfinite(points)):
        raise ParameterDomainError("频率必须为有限值")
    return _scalar_or_array(create_covariance(model).spectral_density(points), single)


def covariance_density(model: CovarianceModel, x) -> float | np.ndarray:
    """
    协方差密度 f(x)，奇异集上返回 +inf。

    Raises:
        NumericalIntegrationError: Bessel 积分未收敛。
    """
    points, single = as_points(x, model.k)
    return _scalar_or_array(create_covariance(model).covariance_density(points), single)


def spectral_constant(model: CovarianceModel) -> float:
    """(2π)^{-k} ∫ e^{iξx} (dμ/dξ) dξ = κ f(x) 中的常数 κ。"""
    return create_covariance(model).spectral_constant()


def critical_eta(model: CovarianceModel) -> float | None:
    """使积分条件成立的 η 的下确界。"""
    return create_covariance(model).critical_eta()


def lattice_weights(model: CovarianceModel, grid: SpatialGrid, half: bool = False) -> np.ndarray:
    """
    每个格点频率的谱权重 (dμ/dξ)(ξ_m) · Δξ · (2π)^{-k} = (dμ/dξ)(ξ_m) / L^k。

    Raises:
        InvariantViolation: 出现负权重。
    """
    if grid.k != model.k:
        raise ParameterDomainError(f"网格维数 {grid.k} 与协方差维数 {model.k} 不一致")
    density = create_covariance(model).lattice_density(grid, half)
    if np.any(density < 0):
        raise InvariantViolation("谱权重出现负值")
    return density / grid.L**grid.k
