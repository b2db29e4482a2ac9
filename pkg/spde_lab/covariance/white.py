import numpy as np

from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import AnalyticRule  # type: ignore
from .geometry import sphere_area


class WhiteCovariance(CovarianceBase):
    """空间白噪声: μ(dξ) = dξ，f = δ₀。"""

    __slots__ = ()

    rule = AnalyticRule.White

    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(xi)[:-1])

    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        at_origin = np.all(np.asarray(x) == 0, axis=-1)
        return np.where(at_origin, np.inf, 0.0)

    def analytic_condition(self, eta: float) -> bool:
        return self.k < 2 * eta

    def critical_eta(self) -> float:
        return self.k / 2

    def radial_measure(self):
        return sphere_area(self.k), self.k - 1.0, np.ones_like
