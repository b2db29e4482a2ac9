import math

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import AnalyticRule  # type: ignore


class FractionalCovariance(CovarianceBase):
    """分数核: f(x) = c_{k,H} ∏ |x_j|^{2H_j-2}，μ(dξ) = ∏ |ξ_j|^{1-2H_j} dξ。"""

    __slots__ = ()

    rule = AnalyticRule.Fractional

    @property
    def hurst(self) -> np.ndarray:
        return np.asarray(self._model.hurst, dtype=float)

    @property
    def exponents(self) -> np.ndarray:
        """谱密度各轴的幂次 a_j = 1 - 2H_j ∈ ]-1, 0[。"""
        return 1 - 2 * self.hurst

    @property
    def normalizer(self) -> float:
        """c_{k,H} = ∏ H_j (2H_j - 1)。"""
        return float(np.prod(self.hurst * (2 * self.hurst - 1)))

    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        xi = np.abs(np.asarray(xi, dtype=float))
        with np.errstate(divide="ignore"):
            parts = np.where(xi > 0, xi**self.exponents, np.inf)
        return np.prod(parts, axis=-1)

    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            parts = np.where(x > 0, x ** (2 * self.hurst - 2), np.inf)
        return self.normalizer * np.prod(parts, axis=-1)

    def analytic_condition(self, eta: float) -> bool:
        return float(self.hurst.sum()) > self.k - eta

    def critical_eta(self) -> float:
        return self.k - float(self.hurst.sum())

    def spectral_constant(self) -> float:
        out = 1.0
        for h in self._model.hurst:
            out *= math.gamma(2 - 2 * h) * (-math.cos(math.pi * h)) / (math.pi * h * (2 * h - 1))
        return out

    def radial_measure(self):
        # ∏|ξ_j|^{a_j} 是 Σa_j 次齐次函数，球面积分有闭式
        shifted = self.exponents + 1
        angular = 2 * math.prod(math.gamma(s / 2) for s in shifted) / math.gamma(
            float(shifted.sum()) / 2
        )
        return angular, self.k - 1.0 + float(self.exponents.sum()), np.ones_like

    def lattice_density(self, grid: SpatialGrid, half: bool = False) -> np.ndarray:
        delta = 2 * math.pi / grid.L
        xi = np.abs(grid.frequencies(half))
        density = np.ones(xi.shape[:-1])
        for axis, a in enumerate(self.exponents):
            # ξ_j = 0 时取该轴频率单元上的平均值
            cell = 2 * (delta / 2) ** (a + 1) / ((a + 1) * delta)
            component = xi[..., axis]
            with np.errstate(divide="ignore"):
                density *= np.where(component > 0, component**a, cell)
        return density
