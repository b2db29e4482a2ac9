import numpy as np
from scipy import fft

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import OperatorSpec, Representation, ShapeError  # type: ignore
from .operator import constant_coefficients
from .propagator import PropagatorSet


class SpectralPropagator(PropagatorSet):
    """
    常系数算子的精确谱乘子 exp(-(ξᵀAξ + i b·ξ + c) (t_i - t_j))。
    """

    representation = Representation.SpectralMultiplier

    def __init__(
        self,
        op: OperatorSpec,
        grid: SpatialGrid,
        time_grid: TimeGrid,
        workers: int = 1,
    ) -> None:
        super().__init__(op, grid, time_grid)
        self._workers = workers
        self._A, self._b, self._c = constant_coefficients(op)
        self._symbol_half = self.symbol(half=True)
        self._one_step = self._jump_symbol(1)

    def symbol(self, half: bool = False) -> np.ndarray:
        """q(ξ) = ξᵀAξ + i b·ξ + c。"""
        xi = self._grid.frequencies(half)
        quad = np.einsum("...i,ij,...j->...", xi, self._A, xi)
        return quad + 1j * (xi @ self._b) + self._c

    def multiplier(self, steps: int, half: bool = False) -> np.ndarray:
        """steps 个时间步的乘子 exp(-q steps dt)。"""
        if half:
            return self._jump_symbol(steps)
        return np.exp(-self.symbol() * steps * self.dt)

    def step_gain(self) -> np.ndarray:
        """全频率网格上单步乘子的模平方 |E(ξ)|²。"""
        return np.abs(self.multiplier(1)) ** 2

    def _jump_symbol(self, steps: int) -> np.ndarray:
        # 半空间上 Γ(t_{j+steps}; t_j) 的乘子
        return np.exp(-self._symbol_half * (steps * self.dt))

    def _forward(self, u: np.ndarray) -> np.ndarray:
        return fft.rfftn(u, axes=self._grid.axes, workers=self._workers)

    def _inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return fft.irfftn(
            spectrum, s=self._grid.shape, axes=self._grid.axes, workers=self._workers
        )

    def step(self, u: np.ndarray, j: int) -> np.ndarray:
        return self._inverse(self._one_step * self._forward(self._check(u)))

    def apply(self, u: np.ndarray, i: int, j: int) -> np.ndarray:
        u = self._check(u)
        if not 0 <= j <= i <= self._time_grid.steps:
            raise ShapeError(f"时间下标必须满足 0 ≤ j ≤ i ≤ M (i={i}, j={j})")
        if i == j:
            return u.copy()
        return self._inverse(self._jump_symbol(i - j) * self._forward(u))

    def convolve(
        self,
        sources: np.ndarray,
        weights: np.ndarray | None = None,
        include_diagonal: bool = False,
    ) -> np.ndarray:
        sources = self._check(sources)
        steps = self._time_grid.steps
        k = self._grid.k
        time_axis = sources.ndim - k - 1
        count = sources.shape[time_axis]
        if count not in (steps, steps + 1):
            raise ShapeError(f"源项个数 {count} 必须为 M 或 M+1 (M={steps})")
        src_hat = np.moveaxis(self._forward(sources), time_axis, 0)
        out_hat = np.zeros((steps + 1, *src_hat.shape[1:]), dtype=complex)

        if weights is None:
            acc = np.zeros(src_hat.shape[1:], dtype=complex)
            for i in range(steps):
                out_hat[i] = acc + src_hat[i] if include_diagonal else acc
                acc = self._one_step * (acc + src_hat[i])
            out_hat[steps] = acc + src_hat[steps] if include_diagonal and count > steps else acc
        else:
            weights = self._check_weights(weights, count)
            table = np.stack([self._jump_symbol(m) for m in range(steps + 1)])
            # 批量维插在时间维与频率维之间
            batch = src_hat.ndim - 1 - k
            table = table.reshape(table.shape[:1] + (1,) * batch + table.shape[1:])
            for i in range(steps + 1):
                upper = min(i + 1 if include_diagonal else i, count)
                js = np.nonzero(weights[i, :upper])[0]
                if js.size == 0:
                    continue
                w = weights[i, js].reshape((-1,) + (1,) * (src_hat.ndim - 1))
                out_hat[i] = np.sum(w * table[i - js] * src_hat[js], axis=0)
        out = self._inverse(out_hat)
        return np.moveaxis(out, 0, time_axis)
