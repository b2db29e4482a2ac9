import math

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.types import ParameterDomainError  # type: ignore


def heat_kernel_eval(t: float, x, diffusivity: float = 1.0) -> float | np.ndarray:
    """
    归一化热核 (4π a t)^{-k/2} exp(-|x|²/(4 a t))。

    Args:
        t: 时间，须为正。
        x: 单个空间点 (标量视为 k=1)，或形状为 (..., k) 的点数组。
        diffusivity: 扩散系数 a。

    Raises:
        ParameterDomainError: t ≤ 0 或 a ≤ 0。
    """
    if not t > 0:
        raise ParameterDomainError(f"热核的时间参数必须为正 (t={t})")
    if not diffusivity > 0:
        raise ParameterDomainError(f"扩散系数必须为正 (a={diffusivity})")
    points = np.asarray(x, dtype=float)
    single = points.ndim <= 1
    if points.ndim == 0:
        points = points.reshape(1)
    k = points.shape[-1]
    r2 = np.sum(points**2, axis=-1)
    scale = 4 * math.pi * diffusivity * t
    value = scale ** (-k / 2) * np.exp(-r2 / (4 * diffusivity * t))
    return float(value) if single else value


def lattice_heat_kernel(
    grid: SpatialGrid,
    t: float,
    diffusivity: float = 1.0,
    center: tuple[int, ...] | None = None,
) -> np.ndarray:
    """以周期最小像距离在格点上计算热核。"""
    return heat_kernel_eval(t, grid.displacement(center), diffusivity)


def dominating_kernel(t: float, displacement: np.ndarray, c: float) -> np.ndarray:
    """S(t, x) = t^{-k/2} exp(-c|x|²/t)。"""
    k = displacement.shape[-1]
    r2 = np.sum(displacement**2, axis=-1)
    return t ** (-k / 2) * np.exp(-c * r2 / t)
