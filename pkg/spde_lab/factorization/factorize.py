import math

import numpy as np

from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    ConfigError,
    CovarianceModel,
    FactorizationConfig,
    ParameterDomainError,
    ShapeError,
)
from ..covariance import create_covariance, critical_eta  # type: ignore
from ..greens import PropagatorSet  # type: ignore


def _noise_sources(P: PropagatorSet, Z: np.ndarray, noise: np.ndarray) -> np.ndarray:
    # Z(t_j) ⊙ ΔW_j，j = 0..M-1，前置维为路径批量
    steps = P.time_grid.steps
    k = P.grid.k
    Z = np.asarray(Z, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if noise.shape[noise.ndim - k - 1 :] != (steps, *P.grid.shape):
        raise ShapeError(f"噪声路径形状 {noise.shape} 与时空网格不符")
    time_axis = Z.ndim - k - 1
    if time_axis < 0 or Z.shape[time_axis] not in (steps, steps + 1):
        raise ShapeError(f"Z 的形状 {Z.shape} 与时空网格不符")
    if not np.all(np.isfinite(Z)):
        raise ShapeError("Z 必须为有限值")
    Z = np.take(Z, np.arange(steps), axis=time_axis)
    return Z * noise


def y_delta_weights(times: np.ndarray, delta: float) -> np.ndarray:
    """w_ij = (t_i - t_j)^{-δ}，j < i，左端点取值。"""
    gaps = times[:, None] - times[None, :-1]
    out = np.zeros_like(gaps)
    mask = gaps > 0
    out[mask] = gaps[mask] ** (-delta)
    return out


def product_weights(times: np.ndarray, delta: float, rule: str = "left") -> np.ndarray:
    """
    (t_i - s)^{δ-1} 在时间格子上的精确积分。

    left:  第 j 列对应格子 [t_j, t_{j+1}]，j < i；
    right: 第 j 列对应格子 [t_{j-1}, t_j]，1 ≤ j ≤ i。

    Returns:
        np.ndarray: 形状为 (M+1, M+1) 的权重矩阵。
    """
    n = len(times)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    t_i = times[:, None]
    if rule == "left":
        valid = j < i
        upper = np.clip(t_i - times[None, :], 0.0, None)
        lower = np.clip(t_i - np.append(times[1:], times[-1])[None, :], 0.0, None)
    elif rule == "right":
        valid = (j >= 1) & (j <= i)
        upper = np.clip(t_i - np.insert(times[:-1], 0, times[0])[None, :], 0.0, None)
        lower = np.clip(t_i - times[None, :], 0.0, None)
    else:
        raise ConfigError(f"未知的乘积积分规则: {rule}")
    return np.where(valid, (upper**delta - lower**delta) / delta, 0.0)


def compute_Y_delta(
    P: PropagatorSet, Z: np.ndarray, noise: np.ndarray, cfg: FactorizationConfig
) -> np.ndarray:
    """
    Y_δ(t_i) = Σ_{j<i} (t_i - t_j)^{-δ} Γ(t_i; t_j)(Z(t_j) ⊙ ΔW_j)。

    Args:
        P: 传播子。
        Z: 形状为 (..., M 或 M+1, *grid.shape) 的有限场。
        noise: 形状为 (..., M, *grid.shape) 的噪声增量。
        cfg: 因子分解参数。

    Returns:
        np.ndarray: 形状为 (..., M+1, *grid.shape) 的 Y_δ。
    """
    sources = _noise_sources(P, Z, noise)
    weights = y_delta_weights(P.time_grid.times, cfg.delta)
    return P.convolve(sources, weights)


def reconstruct(P: PropagatorSet, Y: np.ndarray, cfg: FactorizationConfig) -> np.ndarray:
    """
    R(t_i) = sin(πδ)/π Σ_j w_ij Γ(t_i; t_j) Y(t_j)，w_ij 为 product_weights 的精确格子积分。

    Returns:
        np.ndarray: 重构的随机卷积，形状与 Y 相同。
    """
    Y = np.asarray(Y, dtype=float)
    steps = P.time_grid.steps
    time_axis = Y.ndim - P.grid.k - 1
    if time_axis < 0 or Y.shape[time_axis] != steps + 1:
        raise ShapeError(f"Y 的形状 {Y.shape} 必须含 M+1={steps + 1} 个时间节点")
    weights = product_weights(P.time_grid.times, cfg.delta, cfg.rule)
    out = P.convolve(Y, weights, include_diagonal=cfg.rule == "right")
    return math.sin(math.pi * cfg.delta) / math.pi * out


def direct_convolution(P: PropagatorSet, Z: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """离散随机卷积 Σ_{j<i} Γ(t_i; t_j)(Z(t_j) ⊙ ΔW_j)。"""
    return P.convolve(_noise_sources(P, Z, noise))


def round_trip(
    P: PropagatorSet, Z: np.ndarray, noise: np.ndarray, cfg: FactorizationConfig
) -> float:
    """reconstruct(compute_Y_delta(Z)) 相对直接随机卷积的 L² 相对误差。"""
    direct = direct_convolution(P, Z, noise)
    rebuilt = reconstruct(P, compute_Y_delta(P, Z, noise, cfg), cfg)
    scale = float(np.linalg.norm(direct))
    if scale == 0:
        return 0.0 if not np.any(rebuilt) else math.inf
    error = float(np.linalg.norm(rebuilt - direct)) / scale
    logger.debug(f"因子分解往返误差 (δ={cfg.delta:.4g}, {cfg.rule}): {error:.4e}")
    return error


def default_config(
    model: CovarianceModel, eta: float | None = None, rule: str = "left"
) -> FactorizationConfig:
    """
    η = η* + 0.05 (1 - η*)，δ = min(0.9 (1-η)/2, 0.45)。

    Raises:
        ConfigError: 自定义谱协方差未给出 η，或 η 不满足积分条件。
    """
    if eta is None:
        eta_star = critical_eta(model)
        if eta_star is None:
            raise ConfigError("自定义谱协方差需要显式给出因子分解的 η")
        if eta_star >= 1:
            raise ParameterDomainError(f"协方差不满足任何 η < 1 的积分条件 (η*={eta_star:.4g})")
        eta = eta_star + 0.05 * (1 - eta_star)
    holds = create_covariance(model).analytic_condition(eta)
    if holds is False:
        raise ConfigError(f"η={eta:.4g} 不满足协方差的积分条件")
    return FactorizationConfig(delta=min(0.9 * (1 - eta) / 2, 0.45), eta=eta, rule=rule)
