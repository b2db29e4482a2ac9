import math

import numpy as np

from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import AnalyticRule  # type: ignore
from ..common.utils import checked_quad, integration_retry  # type: ignore
from .geometry import sphere_area

# 代换 w = e^u 后的积分区间
U_RANGE = (-40.0, 40.0)
EPSABS = 1e-10


@integration_retry(max_retries=4, base_limit=200)
def bessel_integral(r: float, alpha: float, k: int, *, limit: int) -> float:
    """
    计算 f_α(r) = ∫_0^∞ w^{(α-k-2)/2} e^{-w - r²/(4w)} dw。

    代换 w = e^u 后在 u ∈ [-40, 40] 上做自适应积分，绝对容差 1e-10。
    """
    nu = (alpha - k) / 2
    quarter = r * r / 4

    def integrand(u: float) -> float:
        w = math.exp(u)
        return math.exp(nu * u - w - quarter / w)

    value, _ = checked_quad(integrand, *U_RANGE, limit=limit, epsabs=EPSABS, epsrel=1e-10)
    return value


class BesselCovariance(CovarianceBase):
    """Bessel 核: μ(dξ) = (1+|ξ|²)^{-α/2} dξ。"""

    __slots__ = ()

    rule = AnalyticRule.Bessel

    @property
    def alpha(self) -> float:
        return float(self._model.alpha)

    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        r2 = np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1)
        return (1 + r2) ** (-self.alpha / 2)

    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        out = np.empty(r.shape)
        cache: dict[float, float] = {}
        for index, radius in np.ndenumerate(r):
            radius = float(radius)
            if radius not in cache:
                if radius == 0 and self.alpha <= self.k:
                    cache[radius] = math.inf
                else:
                    cache[radius] = bessel_integral(radius, self.alpha, self.k)
            out[index] = cache[radius]
        return out

    def analytic_condition(self, eta: float) -> bool:
        return self.alpha > self.k - 2 * eta

    def critical_eta(self) -> float:
        return max(0.0, (self.k - self.alpha) / 2)

    def spectral_constant(self) -> float:
        return 1 / (math.gamma(self.alpha / 2) * (4 * math.pi) ** (self.k / 2))

    def radial_measure(self):
        half_alpha = self.alpha / 2
        return (
            sphere_area(self.k),
            self.k - 1.0,
            lambda rho: (1 + np.asarray(rho) ** 2) ** (-half_alpha),
        )
