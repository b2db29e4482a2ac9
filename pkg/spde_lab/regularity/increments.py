import math
from collections.abc import Sequence
from typing import Any

import numpy as np

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import (  # type: ignore
    ConfigError,
    Direction,
    IncrementMomentTable,
    ParameterDomainError,
    ShapeError,
    SolutionField,
)

ANCHOR_TIMES = 8
ANCHOR_SITES = 16
MAX_BATCHES = 20


def _stack(paths: Sequence[SolutionField], baseline: np.ndarray | None) -> np.ndarray:
    if len(paths) < 2:
        raise ParameterDomainError(f"增量矩至少需要 2 条路径 (当前 {len(paths)})")
    first = paths[0]
    for path in paths[1:]:
        if path.grid != first.grid or path.time_grid != first.time_grid:
            raise ShapeError("所有路径必须位于同一时空网格上")
    values = np.stack([path.values for path in paths])
    if baseline is not None:
        baseline = np.asarray(baseline, dtype=float)
        if baseline.shape != values.shape[1:]:
            raise ShapeError(f"I₀ 的形状 {baseline.shape} 与解场 {values.shape[1:]} 不符")
        values = values - baseline
    return values


def dyadic_lags(unit: float, extent: float) -> list[float]:
    """unit · 2^m，m = 0, 1, ...，不超过 extent / 8。"""
    lags = []
    lag = unit
    while lag <= extent / 8 * (1 + 1e-9):
        lags.append(lag)
        lag *= 2
    return lags


def lag_steps(
    lags: Sequence[float], direction: Direction, grid: SpatialGrid, time_grid: TimeGrid
) -> list[int]:
    """
    把物理步长换算为格点步数。

    Raises:
        ConfigError: 步长不是 dt (时间) 或 h (空间) 的正整数倍，或空间步长不小于周期。
    """
    to_steps = time_grid.lag_to_steps if direction is Direction.Time else grid.lag_to_steps
    steps = []
    for lag in lags:
        s = to_steps(float(lag))
        if s < 0:
            unit = "dt" if direction is Direction.Time else "h"
            raise ConfigError(f"步长 {lag:g} 不是 {unit} 的正整数倍")
        steps.append(s)
    if direction is Direction.Space and steps and max(steps) >= grid.N:
        raise ConfigError(f"空间步长不得超过周期 (最大 {max(steps)} 步, N={grid.N})")
    return steps


def anchor_policy(
    steps: int,
    dt: float,
    grid_shape: tuple[int, ...],
    max_lag_steps: int,
    direction: Direction,
    burn_in: float | None = None,
    n_times: int = ANCHOR_TIMES,
    n_sites: int = ANCHOR_SITES,
) -> dict[str, Any]:
    """
    锚点策略: n_times 个锚点时间均匀分布于 [burn_in, T - 最大时间步长]，
    n_sites 个锚点格点沿展平下标均匀分布。burn_in 默认为 T/2。
    """
    T = steps * dt
    burn_in = T / 2 if burn_in is None else burn_in
    first = math.ceil(burn_in / dt - 1e-9)
    last = steps - (max_lag_steps if direction is Direction.Time else 0)
    if first < 1 or first > last:
        raise ConfigError(
            f"锚点时间区间为空 (burn_in={burn_in:.4g}, 最大步长 {max_lag_steps} 步, M={steps})"
        )
    times = np.unique(np.linspace(first, last, n_times).round().astype(int))
    size = int(np.prod(grid_shape))
    flat = np.unique(np.linspace(0, size - 1, n_sites).round().astype(int))
    sites = [[int(v) for v in np.unravel_index(f, grid_shape)] for f in flat]
    return {
        "burn_in": burn_in,
        "times": times.tolist(),
        "sites": sites,
    }


def path_increment_moments(
    values: np.ndarray,
    p: float,
    direction: Direction,
    steps: Sequence[int],
    anchors: dict[str, Any],
    k: int,
) -> np.ndarray:
    """
    每条路径在锚点上平均的 |Δu|^p。

    Args:
        values: 形状为 (paths, M+1, *grid.shape) 的解场。
        p: 矩的阶数。
        direction: 方向。
        steps: 格点步数。
        anchors: 锚点策略。
        k: 空间维数。

    Returns:
        np.ndarray: 形状为 (paths, len(steps)) 的数组。
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != k + 2:
        raise ShapeError(f"解场批量的维数必须为 k+2={k + 2} (当前 {values.ndim})")
    times = np.asarray(anchors["times"], dtype=int)
    if direction is Direction.Time and steps and times.max() + max(steps) >= values.shape[1]:
        raise ConfigError("锚点时间加步长超出时间网格")
    site_index = tuple(np.asarray(anchors["sites"], dtype=int).T)
    base = values[:, times]
    out = np.empty((values.shape[0], len(steps)))
    for n, s in enumerate(steps):
        if direction is Direction.Time:
            shifted = values[:, times + s]
        else:
            shifted = np.roll(base, -s, axis=2)
        diff = np.abs(shifted - base)[(slice(None), slice(None), *site_index)]
        out[:, n] = np.mean(diff**p, axis=(1, 2))
    return out


def table_from_rows(
    per_path: np.ndarray,
    p: float,
    direction: Direction,
    lags: Sequence[float],
    unit: float,
    extent: float,
    anchors: dict[str, Any],
) -> IncrementMomentTable:
    """由逐路径的矩汇总为矩表，标准误差取路径分批的批均值标准差。"""
    per_path = np.asarray(per_path, dtype=float)
    n_paths = per_path.shape[0]
    if n_paths < 2:
        raise ParameterDomainError(f"增量矩至少需要 2 条路径 (当前 {n_paths})")
    batches = np.array_split(per_path, min(n_paths, MAX_BATCHES), axis=0)
    batch_means = np.stack([b.mean(axis=0) for b in batches])
    return IncrementMomentTable(
        p=float(p),
        direction=direction,
        lags=np.asarray(lags, dtype=float),
        moments=per_path.mean(axis=0),
        standard_errors=batch_means.std(axis=0, ddof=1) / math.sqrt(len(batches)),
        n_paths=n_paths,
        unit=unit,
        extent=extent,
        anchors=dict(anchors),
    )


def increment_moments(
    paths: Sequence[SolutionField],
    p: float,
    direction: Direction,
    lags: Sequence[float],
    anchors: dict[str, Any] | None = None,
    burn_in: float | None = None,
    baseline: np.ndarray | None = None,
) -> IncrementMomentTable:
    """
    估计 E|u(t+λ,x) - u(t,x)|^p 或 E|u(t,x+ℓ e₁) - u(t,x)|^p。

    每条路径先对锚点时间与锚点格点取平均，再对路径取平均；
    标准误差由路径分批的批均值估计。

    Args:
        paths: 同一时空网格上的解场，至少 2 条。
        p: 矩的阶数，不小于 2。
        direction: 时间或空间方向。
        lags: 物理步长，须为 dt (时间) 或 h (空间) 的整数倍。
        anchors: anchor_policy 的结果，默认按 burn_in 生成。
        burn_in: 锚点时间下限，默认 T/2。
        baseline: 形状为 (M+1, *grid.shape) 的 I₀，给定时对 u - I₀ 估计。

    Raises:
        ConfigError: 步长不在网格上或锚点区间为空。
    """
    if p < 2:
        raise ParameterDomainError(f"矩的阶数必须不小于 2 (p={p})")
    values = _stack(paths, baseline)
    grid, time_grid = paths[0].grid, paths[0].time_grid
    lags = sorted(float(lag) for lag in lags)
    steps = lag_steps(lags, direction, grid, time_grid)
    if anchors is None:
        anchors = anchor_policy(
            time_grid.steps, time_grid.dt, grid.shape, max(steps), direction, burn_in
        )
    per_path = path_increment_moments(values, p, direction, steps, anchors, grid.k)
    unit = time_grid.dt if direction is Direction.Time else grid.h
    extent = time_grid.T if direction is Direction.Time else grid.L
    return table_from_rows(per_path, p, direction, lags, unit, extent, anchors)
