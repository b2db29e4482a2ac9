import math

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.interfaces import CovarianceBase  # type: ignore
from ..common.types import InvariantViolation, ParameterDomainError  # type: ignore
from ..common.utils import checked_quad, integration_retry  # type: ignore
from .geometry import sphere_nodes

SYMMETRY_RTOL = 1e-10


@integration_retry(max_retries=4, base_limit=200)
def _fourier_cosine(density, x: float, *, limit: int) -> float:
    # (2π)^{-1} ∫ e^{iξx} d(ξ) dξ = π^{-1} ∫_0^∞ cos(ξx) d(ξ) dξ，d 为偶函数
    def integrand(xi: float) -> float:
        return float(density(np.array([xi])))

    if x == 0:
        value, _ = checked_quad(integrand, 0, np.inf, limit=limit)
    else:
        value, _ = checked_quad(integrand, 0, np.inf, limit=limit, weight="cos", wvar=abs(x))
    return value / math.pi


class CustomSpectralCovariance(CovarianceBase):
    """用户给定谱密度的协方差，无解析判定规则。"""

    __slots__ = ()

    def spectral_density(self, xi: np.ndarray) -> np.ndarray:
        values = np.asarray(self._model.density(np.asarray(xi, dtype=float)), dtype=float)
        return np.broadcast_to(values, np.shape(xi)[:-1]).copy()

    def lattice_density(self, grid: SpatialGrid, half: bool = False) -> np.ndarray:
        """
        在格点频率上采样谱密度，并在整个格点上检查 ξ ↦ -ξ 对称性。

        Raises:
            InvariantViolation: 密度非有限或不对称。
        """
        density = super().lattice_density(grid, half)
        xi = grid.frequencies()
        forward = self.spectral_density(xi)
        backward = self.spectral_density(-xi)
        scale = float(np.max(np.abs(forward))) if forward.size else 0.0
        if not np.allclose(forward, backward, rtol=SYMMETRY_RTOL, atol=SYMMETRY_RTOL * scale):
            worst = float(np.max(np.abs(forward - backward)))
            raise InvariantViolation(f"自定义谱密度不满足 ξ ↦ -ξ 对称 (最大偏差 {worst:.3g})")
        return density

    def covariance_density(self, x: np.ndarray) -> np.ndarray:
        """只支持 k = 1，通过余弦 Fourier 积分计算，结果含 (2π)^{-1} 因子。"""
        if self.k != 1:
            raise ParameterDomainError("自定义谱协方差的实空间密度只支持 k = 1")
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1])
        for index in np.ndindex(out.shape):
            out[index] = _fourier_cosine(self._model.density, float(x[index][0]))
        return out

    def analytic_condition(self, eta: float) -> None:
        return None

    def critical_eta(self) -> None:
        return None

    def radial_measure(self):
        dirs, weights = sphere_nodes(self.k)

        def spherical_mean(rho: np.ndarray) -> np.ndarray:
            rho = np.atleast_1d(np.asarray(rho, dtype=float))
            points = rho[:, None, None] * dirs[None, :, :]
            values = self.spectral_density(points)
            return values @ weights

        return 1.0, self.k - 1.0, spherical_mean
