from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import fft, stats

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import (  # type: ignore
    CovarianceModel,
    DegenerateDataError,
    NoiseIncrementField,
    ShapeError,
)
from ..covariance import covariance_density, lattice_weights, spectral_constant  # type: ignore
from .sampler import NoiseSampler


class IsometryResult(NamedTuple):
    mc_variance: float
    analytic_variance: float
    standard_error: float
    n_samples: int


@dataclass
class NormalityResult:
    """单点边缘分布的偏度与超额峰度。"""

    skewness: float
    excess_kurtosis: float
    se_skewness: float
    se_kurtosis: float
    n: int

    def passes(self, n_se: float = 4.0) -> bool:
        return (
            abs(self.skewness) <= n_se * self.se_skewness
            and abs(self.excess_kurtosis) <= n_se * self.se_kurtosis
        )


def _stack(samples) -> tuple[np.ndarray, SpatialGrid | None]:
    if isinstance(samples, np.ndarray):
        return samples, None
    samples = list(samples)
    if not samples:
        raise DegenerateDataError("样本为空")
    grid = samples[0].grid
    for field in samples:
        if field.grid != grid or field.values.shape != samples[0].values.shape:
            raise ShapeError("样本来自不同的网格")
    return np.stack([field.values for field in samples]), grid


def _lag_tuple(lag, k: int) -> tuple[int, ...]:
    lag = (lag,) if np.isscalar(lag) else tuple(lag)
    if len(lag) != k:
        raise ShapeError(f"格点位移的长度必须为 k={k} (lag={lag})")
    return tuple(int(v) for v in lag)


def empirical_covariance(
    samples: Sequence[NoiseIncrementField] | np.ndarray,
    lag,
    other: Sequence[NoiseIncrementField] | np.ndarray | None = None,
) -> tuple[float, float]:
    """
    空间平均协方差估计 E[X(x) Y(x+lag)]。

    均值已知为 0，因此每个样本的空间平均乘积是无偏估计，
    样本之间独立，标准误差取其样本标准差 / sqrt(样本数)。

    Args:
        samples: 噪声场列表，或形状为 (S, *grid.shape) 的数组。
        lag: 格点位移向量。
        other: 可选的第二组样本，用于交叉协方差。

    Returns:
        tuple[float, float]: 估计值与标准误差。
    """
    data, grid = _stack(samples)
    partner = data
    if other is not None:
        partner, other_grid = _stack(other)
        if partner.shape != data.shape or (grid and other_grid and grid != other_grid):
            raise ShapeError("交叉协方差的两组样本形状不一致")
    if data.shape[0] < 2:
        raise DegenerateDataError("至少需要两个样本")
    k = data.ndim - 1
    shift = _lag_tuple(lag, k)
    axes = tuple(range(1, k + 1))
    shifted = np.roll(partner, tuple(-s for s in shift), axis=axes)
    per_sample = np.mean(data * shifted, axis=axes)
    return float(per_sample.mean()), float(per_sample.std(ddof=1) / np.sqrt(len(per_sample)))


def periodized_covariance(grid: SpatialGrid, model: CovarianceModel, dt: float, lag) -> float:
    """格点周期化核 dt Σ_ξ w(ξ) cos(ξ·x_lag)，与采样器使用同一套谱权重。"""
    shift = np.asarray(_lag_tuple(lag, grid.k), dtype=float) * grid.h
    weights = lattice_weights(model, grid)
    phase = grid.frequencies() @ shift
    return float(dt * np.sum(weights * np.cos(phase)))


def convolution_variance(
    spectral_weights: np.ndarray,
    step_gain: np.ndarray,
    dt: float,
    lags: Sequence[int] | np.ndarray,
    time_weights: Sequence[float] | np.ndarray | None = None,
) -> float:
    """
    格点 Plancherel 方差 dt Σ_j ω_j² Σ_ξ w(ξ) g(ξ)^{m_j}。

    Args:
        spectral_weights: 全频率网格上的谱权重 w(ξ)。
        step_gain: 单步乘子的模平方 g(ξ) = |E(ξ)|²。
        dt: 时间步长。
        lags: 每一项的步数 m_j = i - j。
        time_weights: 每一项的时间权重 ω_j，默认全为 1。
    """
    lags = np.asarray(lags, dtype=int)
    omega = np.ones(len(lags)) if time_weights is None else np.asarray(time_weights, dtype=float)
    total = 0.0
    for m, w in zip(lags, omega):
        total += w * w * float(np.sum(spectral_weights * step_gain**m))
    return dt * total


def _integrand_array(
    integrand: Callable | np.ndarray, grid: SpatialGrid, time_grid: TimeGrid
) -> np.ndarray:
    if callable(integrand):
        values = np.stack(
            [
                np.broadcast_to(np.asarray(integrand(t, grid.coordinates), dtype=float), grid.shape)
                for t in time_grid.times[:-1]
            ]
        )
    else:
        values = np.asarray(integrand, dtype=float)
    expected = (time_grid.steps, *grid.shape)
    if values.shape != expected:
        raise ShapeError(f"被积函数形状 {values.shape} 与时间-空间网格 {expected} 不符")
    if not np.all(np.isfinite(values)):
        raise ShapeError("被积函数在网格上必须有界")
    return values


def isometry_check(
    integrand: Callable | np.ndarray,
    model: CovarianceModel,
    grid: SpatialGrid,
    time_grid: TimeGrid,
    n_samples: int,
    rng: np.random.Generator,
) -> IsometryResult:
    """
    比较离散随机积分 Σ_n Σ_x H(t_n,x) ΔW_n(x) h^k 的蒙特卡罗方差与格点 Plancherel 方差。

    Args:
        integrand: H(t, 坐标元组) 或形状为 (M, *grid.shape) 的数组。
        model: 协方差模型。
        grid, time_grid: 空间与时间网格。
        n_samples: 样本数。
        rng: 随机数生成器。

    Returns:
        IsometryResult: (蒙特卡罗方差, 解析方差, 方差的标准误差, 样本数)。
    """
    H = _integrand_array(integrand, grid, time_grid)
    dt = time_grid.dt
    weights = lattice_weights(model, grid)
    h_hat = grid.cell_volume * fft.fftn(H, axes=grid.axes)
    analytic = float(dt * np.sum(np.abs(h_hat) ** 2 * weights))

    sampler = NoiseSampler(grid, model, dt)
    per_batch = max(1, (1 << 22) // (time_grid.steps * grid.size))
    integrals = np.empty(n_samples)
    done = 0
    while done < n_samples:
        b = min(per_batch, n_samples - done)
        noise = sampler.sample(rng, b * time_grid.steps).reshape(b, *H.shape)
        integrals[done : done + b] = grid.cell_volume * np.sum(
            noise * H, axis=tuple(range(1, H.ndim + 1))
        )
        done += b

    centered = integrals - integrals.mean()
    variance = float(np.mean(centered**2) * n_samples / (n_samples - 1))
    fourth = float(np.mean(centered**4))
    se = float(np.sqrt(max(fourth - np.mean(centered**2) ** 2, 0.0) / n_samples))
    return IsometryResult(variance, analytic, se, n_samples)


def normality_check(samples: Sequence[NoiseIncrementField] | np.ndarray, site) -> NormalityResult:
    """单点边缘分布的偏度与超额峰度检验。"""
    data, _ = _stack(samples)
    index = (slice(None), *_lag_tuple(site, data.ndim - 1))
    values = data[index]
    n = len(values)
    return NormalityResult(
        skewness=float(stats.skew(values)),
        excess_kurtosis=float(stats.kurtosis(values)),
        se_skewness=float(np.sqrt(6 / n)),
        se_kurtosis=float(np.sqrt(24 / n)),
        n=n,
    )


def kernel_self_consistency(
    model: CovarianceModel, grid: SpatialGrid, sites: Sequence
) -> list[dict[str, float]]:
    """
    比较谱权重的逆离散 Fourier 变换 (除以 κ) 与 f 在非奇异格点上的值。

    Returns:
        list[dict]: 每个格点的坐标、格点值、f 值与相对误差。
    """
    kappa = spectral_constant(model)
    rows = []
    for site in sites:
        lag = _lag_tuple(site, grid.k)
        lattice = periodized_covariance(grid, model, 1.0, lag) / kappa
        point = np.asarray(lag, dtype=float) * grid.h
        exact = float(covariance_density(model, point))
        rows.append(
            {
                "x": float(np.linalg.norm(point)),
                "lattice": lattice,
                "exact": exact,
                "relative_error": abs(lattice - exact) / abs(exact),
            }
        )
    return rows
