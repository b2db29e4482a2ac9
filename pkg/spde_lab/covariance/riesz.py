import math

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import AnalyticRule  # type: ignore
from .geometry import ball_volume, sphere_area


class RieszCovariance(CovarianceBase):
    """Riesz 核: f(x) = |x|^{-β}，μ(dξ) = |ξ|^{β-k} dξ。"""

    __slots__ = ()

    rule = AnalyticRule.Riesz

    @property
    def beta(self) -> float:
        return float(self._model.beta)

    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(xi, axis=-1)
        with np.errstate(divide="ignore"):
            return np.where(r > 0, r ** (self.beta - self.k), np.inf)

    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore"):
            return np.where(r > 0, r ** (-self.beta), np.inf)

    def analytic_condition(self, eta: float) -> bool:
        return 0 < self.beta < min(self.k, 2 * eta)

    def critical_eta(self) -> float:
        return self.beta / 2

    def spectral_constant(self) -> float:
        k, b = self.k, self.beta
        return 2 ** (b - k) * math.pi ** (-k / 2) * math.gamma(b / 2) / math.gamma((k - b) / 2)

    def radial_measure(self):
        return sphere_area(self.k), self.beta - 1.0, np.ones_like

    def zero_mode_average(self, grid: SpatialGrid) -> float:
        """
        零频单元上的密度平均值。

        频率单元 [-Δ/2, Δ/2]^k 用等体积球代替，k=1 时二者重合。
        """
        delta = 2 * math.pi / grid.L
        radius = (delta**self.k / ball_volume(self.k)) ** (1 / self.k)
        integral = sphere_area(self.k) * radius**self.beta / self.beta
        return integral / delta**self.k

    def lattice_density(self, grid: SpatialGrid, half: bool = False) -> np.ndarray:
        xi = grid.frequencies(half)
        density = self.spectral_density(xi)
        density[(0,) * self.k] = self.zero_mode_average(grid)
        return density
