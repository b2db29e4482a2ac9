from collections.abc import Callable
from typing import Any

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.log import logger  # type: ignore
from ..common.types import Coefficients, ConfigError, ParameterDomainError  # type: ignore

# 预设名 -> 允许的参数名
COEFFICIENT_PRESETS: dict[str, tuple[str, ...]] = {
    "constant": ("value",),
    "sin": ("amplitude", "shift"),
    "affine": ("slope", "intercept"),
    "clipped-linear": ("slope", "bound"),
}

INITIAL_PRESETS = ("zero", "constant", "bump")


class _Preset:
    """单个系数预设: 函数句柄与它的 Lipschitz / 线性增长常数。"""

    __slots__ = ("func", "lipschitz", "growth", "state_dependent", "label")

    def __init__(
        self,
        func: Callable[[float, tuple[np.ndarray, ...], np.ndarray], np.ndarray],
        lipschitz: float,
        growth: float,
        state_dependent: bool,
        label: str,
    ) -> None:
        self.func = func
        self.lipschitz = lipschitz
        self.growth = growth
        self.state_dependent = state_dependent
        self.label = label


def _create_preset(name: str, params: dict[str, float]) -> _Preset:
    unknown = set(params) - set(COEFFICIENT_PRESETS.get(name, ()))
    if name not in COEFFICIENT_PRESETS:
        raise ConfigError(f"未知的系数预设: {name}")
    if unknown:
        raise ConfigError(f"系数预设 {name} 不接受参数: {sorted(unknown)}")

    if name == "constant":
        value = float(params.get("value", 1.0))
        return _Preset(
            lambda t, coords, z: np.full(np.shape(z), value),
            0.0,
            abs(value),
            False,
            f"{value:g}",
        )
    elif name == "sin":
        amplitude = float(params.get("amplitude", 1.0))
        shift = float(params.get("shift", 0.0))
        return _Preset(
            lambda t, coords, z: shift + amplitude * np.sin(z),
            abs(amplitude),
            abs(shift) + abs(amplitude),
            amplitude != 0,
            f"{shift:g}+{amplitude:g}·sin(z)",
        )
    elif name == "affine":
        slope = float(params.get("slope", 1.0))
        intercept = float(params.get("intercept", 0.0))
        return _Preset(
            lambda t, coords, z: intercept + slope * z,
            abs(slope),
            max(abs(slope), abs(intercept)),
            slope != 0,
            f"{intercept:g}+{slope:g}·z",
        )
    slope = float(params.get("slope", 1.0))
    bound = float(params.get("bound", 1.0))
    if bound < 0:
        raise ParameterDomainError(f"截断线性系数的上界必须非负 (bound={bound})")
    return _Preset(
        lambda t, coords, z: np.clip(slope * z, -bound, bound),
        abs(slope),
        bound,
        slope != 0 and bound > 0,
        f"clip({slope:g}·z, ±{bound:g})",
    )


def make_coefficients(
    sigma: tuple[str, dict[str, float]] = ("constant", {"value": 1.0}),
    drift: tuple[str, dict[str, float]] = ("constant", {"value": 0.0}),
) -> Coefficients:
    """
    由预设名构造方程系数 σ 与 b。

    Args:
        sigma: (预设名, 参数) 二元组。
        drift: (预设名, 参数) 二元组。

    Returns:
        Coefficients: C 取两者 Lipschitz 常数的最大值，c̄ 取两者增长常数之和。

    Raises:
        ConfigError: 预设名或参数未知。
    """
    s = _create_preset(sigma[0], dict(sigma[1]))
    b = _create_preset(drift[0], dict(drift[1]))
    return Coefficients(
        sigma=s.func,
        drift=b.func,
        lipschitz=max(s.lipschitz, b.lipschitz),
        growth=s.growth + b.growth,
        state_dependent=s.state_dependent or b.state_dependent,
        name=f"σ={s.label}, b={b.label}",
    )


def evaluate(func, t: float, grid: SpatialGrid, z: np.ndarray) -> np.ndarray:
    """在网格上计算系数，结果广播到 z 的形状。"""
    return np.broadcast_to(np.asarray(func(t, grid.coordinates, z), dtype=float), z.shape)


def check_coefficients(
    coeff: Coefficients,
    grid: SpatialGrid,
    rng: np.random.Generator,
    T: float = 1.0,
    samples: int = 8,
    scale: float = 10.0,
) -> None:
    """
    随机抽检 |σ(z₁)-σ(z₂)| ≤ C|z₁-z₂|、|b(z₁)-b(z₂)| ≤ C|z₁-z₂| 与 |σ(z)|+|b(z)| ≤ c̄(1+|z|)。

    Raises:
        ParameterDomainError: 抽检发现违反。
    """
    slack = 1 + 1e-9
    for _ in range(samples):
        t = float(rng.uniform(0, T))
        z1 = scale * rng.standard_normal(grid.shape)
        z2 = scale * rng.standard_normal(grid.shape)
        gap = np.abs(z1 - z2)
        for label, func in (("σ", coeff.sigma), ("b", coeff.drift)):
            diff = np.abs(evaluate(func, t, grid, z1) - evaluate(func, t, grid, z2))
            if np.any(diff > coeff.lipschitz * gap * slack + 1e-12):
                raise ParameterDomainError(
                    f"系数 {label} 违反 Lipschitz 条件 (C={coeff.lipschitz:g}, t={t:.4g})"
                )
        size = np.abs(evaluate(coeff.sigma, t, grid, z1)) + np.abs(evaluate(coeff.drift, t, grid, z1))
        if np.any(size > coeff.growth * (1 + np.abs(z1)) * slack + 1e-12):
            raise ParameterDomainError(f"系数违反线性增长条件 (c̄={coeff.growth:g}, t={t:.4g})")
    logger.debug(f"系数抽检通过: {coeff.name}")


def initial_datum(grid: SpatialGrid, name: str = "zero", **params: Any) -> np.ndarray:
    """
    初值预设。

    Args:
        grid: 空间网格。
        name: "zero"、"constant" (参数 value) 或 "bump" (参数 amplitude、width，中心在盒中心)。

    Returns:
        np.ndarray: 形状为 grid.shape 的有界格点函数。
    """
    if name == "zero":
        return np.zeros(grid.shape)
    elif name == "constant":
        return np.full(grid.shape, float(params.get("value", 1.0)))
    elif name == "bump":
        amplitude = float(params.get("amplitude", 1.0))
        width = float(params.get("width", grid.L / 8))
        if not width > 0:
            raise ParameterDomainError(f"初值宽度必须为正 (width={width})")
        r2 = np.sum(grid.displacement((grid.N // 2,) * grid.k) ** 2, axis=-1)
        return amplitude * np.exp(-r2 / (2 * width**2))
    raise ConfigError(f"未知的初值预设: {name}")
