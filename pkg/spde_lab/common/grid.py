from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .types import ParameterDomainError

# 单个网格允许的最大格点数
MAX_GRID_POINTS = 1 << 22


@dataclass(frozen=True)
class SpatialGrid:
    """
    周期空间格点 {0, h, ..., (N-1)h}^k。

    Args:
        k (int): 空间维数。
        N (int): 每个坐标轴的格点数，须为不小于 4 的 2 的幂。
        L (float): 周期盒边长。
    """

    k: int
    N: int
    L: float

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterDomainError(f"空间维数 k 必须为正整数 (k={self.k})")
        if self.N < 4 or self.N & (self.N - 1):
            raise ParameterDomainError(f"N 必须是不小于 4 的 2 的幂 (N={self.N})")
        if not self.L > 0:
            raise ParameterDomainError(f"盒长 L 必须为正 (L={self.L})")
        if self.N**self.k > MAX_GRID_POINTS:
            raise ParameterDomainError(
                f"格点总数 N^k={self.N**self.k} 超出内存预算 {MAX_GRID_POINTS}"
            )

    @property
    def periodic(self) -> bool:
        return True

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.k

    @property
    def size(self) -> int:
        return self.N**self.k

    @property
    def cell_volume(self) -> float:
        return self.h**self.k

    @property
    def axes(self) -> tuple[int, ...]:
        """场数组中空间轴的位置 (从末尾数起)。"""
        return tuple(range(-self.k, 0))

    @property
    def half_shape(self) -> tuple[int, ...]:
        return (*self.shape[:-1], self.N // 2 + 1)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """各坐标轴的格点坐标网格 (indexing="ij")。"""
        axis = np.arange(self.N) * self.h
        return tuple(np.meshgrid(*([axis] * self.k), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """一维角频率 2π m / L，按 FFT 顺序排列。"""
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def frequencies(self, half: bool = False) -> np.ndarray:
        """
        返回频率网格。

        Args:
            half (bool): 为 True 时只返回实 FFT 所需的半空间。

        Returns:
            np.ndarray: 形状为 (*shape, k) 的频率数组。
        """
        axes = [self.wavenumbers] * self.k
        if half:
            axes[-1] = 2 * np.pi * np.fft.rfftfreq(self.N, d=self.h)
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def displacement(self, center: tuple[int, ...] | None = None) -> np.ndarray:
        """
        以周期最小像约定返回各格点相对 center 的位移。

        Returns:
            np.ndarray: 形状为 (*shape, k) 的位移数组。
        """
        center = center or (0,) * self.k
        parts = []
        for axis, c in enumerate(center):
            idx = np.arange(self.N) - c
            idx = (idx + self.N // 2) % self.N - self.N // 2
            shape = [1] * self.k
            shape[axis] = self.N
            parts.append(np.broadcast_to((idx * self.h).reshape(shape), self.shape))
        return np.stack(parts, axis=-1)

    def lag_to_steps(self, lag: float) -> int:
        """把物理步长换算为格点步数，不是 h 的整数倍时返回 -1。"""
        steps = round(lag / self.h)
        if steps < 1 or abs(steps * self.h - lag) > 1e-9 * max(1.0, abs(lag)):
            return -1
        return steps

    def describe(self) -> dict:
        return {"k": self.k, "N": self.N, "L": self.L, "h": self.h}


@dataclass(frozen=True)
class TimeGrid:
    """
    均匀时间网格 t_i = i T / M, i = 0..M。

    Args:
        T (float): 终止时间。
        steps (int): 时间步数 M。
    """

    T: float
    steps: int

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ParameterDomainError(f"终止时间 T 必须为正 (T={self.T})")
        if self.steps < 1:
            raise ParameterDomainError(f"时间步数 M 必须为正 (M={self.steps})")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @cached_property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def lag_to_steps(self, lag: float) -> int:
        """把时间步长换算为步数，不是 dt 的整数倍时返回 -1。"""
        steps = round(lag / self.dt)
        if steps < 1 or abs(steps * self.dt - lag) > 1e-9 * max(1.0, abs(lag)):
            return -1
        return steps

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.steps * factor)

    def describe(self) -> dict:
        return {"T": self.T, "M": self.steps, "dt": self.dt}
