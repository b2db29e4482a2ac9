from abc import ABC, abstractmethod

import numpy as np

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import OperatorSpec, Representation, ShapeError  # type: ignore


class PropagatorSet(ABC):
    """
    离散基本解 Γ(t_i, ·; t_j, ·) 的抽象基类。

    作用于格点函数 u 时 (Γ u)(x) = Σ_y Γ(t_i, x; t_j, y) h^k u(y)。
    所有方法都支持在空间轴之前附加任意批量维。
    """

    representation: Representation

    def __init__(self, op: OperatorSpec, grid: SpatialGrid, time_grid: TimeGrid) -> None:
        self._op = op
        self._grid = grid
        self._time_grid = time_grid

    @property
    def operator(self) -> OperatorSpec:
        return self._op

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    @property
    def time_grid(self) -> TimeGrid:
        return self._time_grid

    @property
    def dt(self) -> float:
        return self._time_grid.dt

    @abstractmethod
    def step(self, u: np.ndarray, j: int) -> np.ndarray:
        """
        单步传播 Γ(t_{j+1}; t_j) u。

        Args:
            u (np.ndarray): 形状为 (..., *grid.shape) 的格点函数。
            j (int): 起始时间下标。

        Returns:
            np.ndarray: 与 u 同形状的数组。
        """
        pass

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[u.ndim - self._grid.k :] != self._grid.shape:
            raise ShapeError(f"格点函数形状 {u.shape} 与网格 {self._grid.shape} 不符")
        return u

    def apply(self, u: np.ndarray, i: int, j: int) -> np.ndarray:
        """Γ(t_i; t_j) u，要求 j ≤ i。"""
        u = self._check(u)
        if not 0 <= j <= i <= self._time_grid.steps:
            raise ShapeError(f"时间下标必须满足 0 ≤ j ≤ i ≤ M (i={i}, j={j})")
        out = u.copy()
        for n in range(j, i):
            out = self.step(out, n)
        return out

    def delta_response(self, site: tuple[int, ...], i: int, j: int = 0) -> np.ndarray:
        """单位质量点源的响应 Γ(t_i, ·; t_j, y)。"""
        delta = np.zeros(self._grid.shape)
        delta[site] = 1 / self._grid.cell_volume
        return self.apply(delta, i, j)

    def mass(self, i: int = 1, j: int = 0) -> np.ndarray:
        """Γ(t_i; t_j) 作用于常数 1，即 ∫ Γ(t_i, x; t_j, y) dy。"""
        return self.apply(np.ones(self._grid.shape), i, j)

    def convolve(
        self,
        sources: np.ndarray,
        weights: np.ndarray | None = None,
        include_diagonal: bool = False,
    ) -> np.ndarray:
        """
        离散卷积 out_i = Σ_j w_ij Γ(t_i; t_j) s_j。

        Args:
            sources: 形状为 (..., M 或 M+1, *grid.shape) 的源项，第 j 个对应 t_j。
            weights: 形状为 (M+1, 源项个数) 的权重矩阵。为 None 时权重全为 1，
                并用单步递推 acc_{i+1} = Γ(t_{i+1}; t_i)(acc_i + s_i) 计算。
            include_diagonal: 是否包含 j = i 项 (Γ(t_i; t_i) 为恒等)。

        Returns:
            np.ndarray: 形状为 (..., M+1, *grid.shape) 的结果。
        """
        sources = self._check(sources)
        steps = self._time_grid.steps
        k = self._grid.k
        time_axis = sources.ndim - k - 1
        count = sources.shape[time_axis]
        if count not in (steps, steps + 1):
            raise ShapeError(f"源项个数 {count} 必须为 M 或 M+1 (M={steps})")
        src = np.moveaxis(sources, time_axis, 0)
        out = np.zeros((steps + 1, *src.shape[1:]))

        if weights is None:
            acc = np.zeros(src.shape[1:])
            for i in range(steps):
                out[i] = acc + src[i] if include_diagonal else acc
                acc = self.step(acc + src[i], i)
            out[steps] = acc + src[steps] if include_diagonal and count > steps else acc
            return np.moveaxis(out, 0, time_axis)

        weights = self._check_weights(weights, count)
        for j in range(count):
            column = weights[:, j]
            if include_diagonal:
                out[j] += column[j] * src[j]
            if not np.any(column[j + 1 :]):
                continue
            v = src[j]
            for i in range(j + 1, steps + 1):
                v = self.step(v, i - 1)
                if column[i] != 0:
                    out[i] += column[i] * v
        return np.moveaxis(out, 0, time_axis)

    def _check_weights(self, weights: np.ndarray, count: int) -> np.ndarray:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self._time_grid.steps + 1, count):
            raise ShapeError(
                f"权重矩阵形状 {weights.shape} 必须为 ({self._time_grid.steps + 1}, {count})"
            )
        return weights
