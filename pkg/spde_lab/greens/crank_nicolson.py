import math

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    OperatorSpec,
    ParameterDomainError,
    Representation,
)
from .operator import decay_field, diffusion_field, drift_field
from .propagator import PropagatorSet

# 不超过该格点数时缓存稠密单步矩阵
DENSE_LIMIT = 4096


def _periodic_first(n: int, h: float) -> sparse.csr_matrix:
    # (u_{j+1} - u_{j-1}) / 2h
    d = sparse.diags([np.full(n - 1, 1.0), np.full(n - 1, -1.0)], [1, -1], shape=(n, n)).tolil()
    d[n - 1, 0] = 1.0
    d[0, n - 1] = -1.0
    return (d.tocsr()) / (2 * h)


def _periodic_second(n: int, h: float) -> sparse.csr_matrix:
    # (u_{j+1} - 2u_j + u_{j-1}) / h²
    d = sparse.diags(
        [np.full(n - 1, 1.0), np.full(n, -2.0), np.full(n - 1, 1.0)], [1, 0, -1], shape=(n, n)
    ).tolil()
    d[n - 1, 0] = 1.0
    d[0, n - 1] = 1.0
    return (d.tocsr()) / (h * h)


def _embed(op_1d: sparse.csr_matrix, axis: int, k: int, n: int) -> sparse.csr_matrix:
    # I ⊗ ... ⊗ D ⊗ ... ⊗ I，第 axis 个因子为 D (C 顺序展平)
    out = None
    for a in range(k):
        factor = op_1d if a == axis else sparse.identity(n, format="csr")
        out = factor if out is None else sparse.kron(out, factor, format="csr")
    return out


class DifferenceOperators:
    """周期格点上的中心差分矩阵。"""

    __slots__ = ("first", "second")

    def __init__(self, grid: SpatialGrid) -> None:
        n, h, k = grid.N, grid.h, grid.k
        first_1d = _periodic_first(n, h)
        self.first = [_embed(first_1d, axis, k, n) for axis in range(k)]
        second_1d = _periodic_second(n, h)
        self.second = [
            [
                _embed(second_1d, i, k, n) if i == j else self.first[i] @ self.first[j]
                for j in range(k)
            ]
            for i in range(k)
        ]


def generator_matrix(
    op: OperatorSpec, grid: SpatialGrid, t: float, ops: DifferenceOperators
) -> sparse.csr_matrix:
    """非散度型离散生成元 Σ a_ij D_ij - Σ b_i D_i - c。"""
    a = diffusion_field(op, t, grid).reshape(op.k, op.k, -1)
    b = drift_field(op, t, grid).reshape(op.k, -1)
    c = decay_field(op, t, grid).reshape(-1)
    out = sparse.diags(-c)
    for i in range(op.k):
        out = out - sparse.diags(b[i]) @ ops.first[i]
        for j in range(op.k):
            out = out + sparse.diags(a[i, j]) @ ops.second[i][j]
    return out.tocsr()


def monotone_substeps(op: OperatorSpec, grid: SpatialGrid, time_grid: TimeGrid) -> int:
    """使显式半步 I + τA/2 保持非负对角的最少子步数。"""
    times = [0.0] if op.time_independent else np.linspace(0, time_grid.T, 5)
    worst = 0.0
    for t in times:
        a = diffusion_field(op, float(t), grid)
        trace = sum(a[i, i] for i in range(op.k))
        c = np.maximum(decay_field(op, float(t), grid), 0.0)
        worst = max(worst, float(np.max(trace + c * grid.h**2 / 2)))
    return max(1, math.ceil(time_grid.dt * worst / grid.h**2 * (1 + 1e-12)))


class CrankNicolsonPropagator(PropagatorSet):
    """
    变系数算子的 Crank–Nicolson 单步算子。

    每个时间步分为若干等长子步，monotone=True 时子步长满足 τ Σ_i max a_ii / h² ≤ 1。
    时间无关且格点数不超过 DENSE_LIMIT 时缓存稠密单步矩阵，否则每次作用都重新求解。
    """

    representation = Representation.StepOperator

    def __init__(
        self,
        op: OperatorSpec,
        grid: SpatialGrid,
        time_grid: TimeGrid,
        monotone: bool = True,
        dense_limit: int = DENSE_LIMIT,
    ) -> None:
        super().__init__(op, grid, time_grid)
        if time_grid.dt > grid.h * (1 + 1e-12):
            raise ParameterDomainError(
                f"Crank–Nicolson 要求 dt ≤ h (dt={time_grid.dt:.4g}, h={grid.h:.4g})"
            )
        self._monotone = monotone
        self._dense_limit = dense_limit
        self._ops = DifferenceOperators(grid)
        self._substeps = monotone_substeps(op, grid, time_grid) if monotone else 1
        self._tau = time_grid.dt / self._substeps
        self._factor = None
        self._dense: np.ndarray | None = None
        if op.time_independent:
            self._factor = self._factorize(0.0)
            if grid.size <= dense_limit:
                self._dense = self._step_columns(np.eye(grid.size), 0)
        logger.debug(
            f"Crank–Nicolson 传播子: {self._substeps} 个子步/步, τ={self._tau:.4g}, "
            f"稠密={'是' if self._dense is not None else '否'}"
        )

    @property
    def substeps(self) -> int:
        return self._substeps

    def _factorize(self, t: float):
        A = generator_matrix(self._op, self._grid, t, self._ops)
        eye = sparse.identity(self._grid.size, format="csc")
        half = 0.5 * self._tau * A
        return splu((eye - half).tocsc()), (eye + half).tocsr()

    def _step_columns(self, columns: np.ndarray, j: int) -> np.ndarray:
        # columns: (n, m)，每列是一个展平的格点函数
        out = columns
        for s in range(self._substeps):
            if self._factor is not None:
                lu, rhs = self._factor
            else:
                lu, rhs = self._factorize((j * self._substeps + s + 0.5) * self._tau)
            out = lu.solve(np.asarray(rhs @ out))
        return out

    def step(self, u: np.ndarray, j: int) -> np.ndarray:
        u = self._check(u)
        n = self._grid.size
        flat = u.reshape(-1, n).T
        if self._dense is not None:
            moved = self._dense @ flat
        else:
            moved = self._step_columns(np.ascontiguousarray(flat), j)
        return moved.T.reshape(u.shape)

    def step_matrix(self, j: int = 0) -> np.ndarray:
        """稠密单步矩阵，第 y 列为 h^k · Γ(t_{j+1}, ·; t_j, y)。"""
        if self._dense is not None:
            return self._dense.copy()
        return self._step_columns(np.eye(self._grid.size), j)

    def refined(self, factor: int = 2) -> "CrankNicolsonPropagator":
        """时间步长缩小 factor 倍的参考传播子。"""
        return CrankNicolsonPropagator(
            self._op,
            self._grid,
            self._time_grid.refined(factor),
            monotone=self._monotone,
            dense_limit=self._dense_limit,
        )


def explicit_euler_matrix(
    op: OperatorSpec, grid: SpatialGrid, t0: float, dt: float, substeps: int
) -> np.ndarray:
    """显式 Euler 细步参考传播矩阵 ∏ (I + τ A(t))，τ = dt / substeps。"""
    ops = DifferenceOperators(grid)
    tau = dt / substeps
    out = np.eye(grid.size)
    for s in range(substeps):
        A = generator_matrix(op, grid, t0 + s * tau, ops)
        out = out + tau * (A @ out)
    return out
