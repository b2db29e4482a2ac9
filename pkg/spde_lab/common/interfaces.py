from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np

from .grid import SpatialGrid
from .types import AnalyticRule, CovarianceModel, InvariantViolation


class CovarianceBase(ABC):
    """协方差模型抽象基类"""

    __slots__ = ("_model",)

    rule: AnalyticRule = AnalyticRule.NumericalOnly

    def __init__(self, model: CovarianceModel) -> None:
        self._model = model

    @property
    def model(self) -> CovarianceModel:
        return self._model

    @property
    def k(self) -> int:
        return self._model.k

    @abstractmethod
    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        """
        计算谱测度 μ 的密度 dμ/dξ。

        Args:
            xi (np.ndarray): 形状为 (..., k) 的频率数组。

        Returns:
            np.ndarray: 形状为 (...) 的非负数组，奇异频率处为 +inf。
        """
        pass

    @abstractmethod
    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        """
        计算空间协方差密度 f。

        Args:
            x (np.ndarray): 形状为 (..., k) 的空间点数组。

        Returns:
            np.ndarray: 形状为 (...) 的数组，奇异集上为 +inf。
        """
        pass

    @abstractmethod
    def analytic_condition(self, eta: float) -> bool | None:
        """
        按闭式等价条件判定 ∫ μ(dξ)/(1+|ξ|²)^η < ∞。

        Returns:
            bool | None: 无解析规则时返回 None。
        """
        pass

    @abstractmethod
    def critical_eta(self) -> float | None:
        """返回使条件成立的 η 的下确界，无解析规则时返回 None。"""
        pass

    @abstractmethod
    def radial_measure(self) -> tuple[float, float, Callable[[np.ndarray], np.ndarray]]:
        """
        返回径向分解 μ(|ξ| ∈ dρ) = A ρ^p g(ρ) dρ。

        Returns:
            tuple: (A, p, g)，其中 g 在 [0, ∞[ 上光滑有界。
        """
        pass

    def spectral_constant(self) -> float:
        """(2π)^{-k} ∫ e^{iξx} dμ 与 f 之间的比例常数 κ。"""
        return 1.0

    def lattice_density(self, grid: SpatialGrid, half: bool = False) -> np.ndarray:
        """
        在格点频率上采样谱密度，奇异频率用所在频率单元上的平均值代替。

        Args:
            grid (SpatialGrid): 空间网格。
            half (bool): 是否只返回实 FFT 半空间。

        Returns:
            np.ndarray: 非负有限数组。

        Raises:
            InvariantViolation: 出现负值或非有限值。
        """
        density = np.asarray(self.spectral_density(grid.frequencies(half)), dtype=float)
        if not np.all(np.isfinite(density)):
            raise InvariantViolation(f"{self._model.kind.value} 谱密度在格点频率上出现非有限值")
        return density
