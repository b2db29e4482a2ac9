import math

import numpy as np
from scipy import fft

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import (  # type: ignore
    CovarianceKind,
    CovarianceModel,
    NoiseIncrementField,
    ParameterDomainError,
)
from ..covariance import critical_eta, lattice_weights  # type: ignore


def check_admissible(model: CovarianceModel) -> None:
    """要求模型在某个 η < 1 下满足积分条件，白噪声除外。"""
    if model.kind is CovarianceKind.White:
        return
    eta_star = critical_eta(model)
    if eta_star is not None and eta_star >= 1:
        raise ParameterDomainError(
            f"{model.kind.value} 协方差不满足任何 η < 1 的积分条件 (η*={eta_star:.4g})"
        )


class NoiseSampler:
    """
    周期格点上的谱合成噪声采样器。

    每个频率的实 FFT 系数乘以 sqrt(dt · 谱权重)，再做逆变换，
    得到协方差为 dt Σ_ξ w(ξ) cos(ξ·x) 的平稳高斯场。
    """

    __slots__ = ("_grid", "_model", "_dt", "_amplitude", "_workers")

    def __init__(
        self, grid: SpatialGrid, model: CovarianceModel, dt: float, workers: int = 1
    ) -> None:
        if not dt > 0:
            raise ParameterDomainError(f"时间步长 dt 必须为正 (dt={dt})")
        check_admissible(model)
        self._grid = grid
        self._model = model
        self._dt = dt
        self._workers = workers
        weights = lattice_weights(model, grid, half=True)
        self._amplitude = np.sqrt(dt * weights) * math.sqrt(grid.size)

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    @property
    def model(self) -> CovarianceModel:
        return self._model

    @property
    def dt(self) -> float:
        return self._dt

    def sample(self, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
        """
        采样噪声增量。

        Args:
            rng (np.random.Generator): 随机数生成器。
            count (int | None): 为 None 时返回单个场，否则返回 count 个场。

        Returns:
            np.ndarray: 形状为 grid.shape 或 (count, *grid.shape) 的数组。
        """
        shape = self._grid.shape if count is None else (count, *self._grid.shape)
        eps = rng.standard_normal(shape)
        axes = self._grid.axes
        spectrum = fft.rfftn(eps, axes=axes, workers=self._workers)
        spectrum *= self._amplitude
        return fft.irfftn(spectrum, s=self._grid.shape, axes=axes, workers=self._workers)


def sample_increment(
    grid: SpatialGrid,
    model: CovarianceModel,
    dt: float,
    rng: np.random.Generator,
) -> NoiseIncrementField:
    """
    采样一个时间步的噪声增量场。

    给定种子时结果逐位可复现。
    """
    values = NoiseSampler(grid, model, dt).sample(rng)
    return NoiseIncrementField(grid=grid, dt=dt, values=values)


def sample_path(
    grid: SpatialGrid,
    model: CovarianceModel,
    time_grid: TimeGrid,
    rng: np.random.Generator,
    workers: int = 1,
) -> np.ndarray:
    """采样整条路径的噪声增量，形状为 (M, *grid.shape)。"""
    sampler = NoiseSampler(grid, model, time_grid.dt, workers)
    return sampler.sample(rng, time_grid.steps)
