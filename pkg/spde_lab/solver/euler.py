import numpy as np

from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    BlowUpError,
    Coefficients,
    CovarianceModel,
    ShapeError,
    SolutionField,
)
from ..greens import PropagatorSet  # type: ignore
from ..noise import sample_path  # type: ignore
from .coefficients import evaluate


def initial_field(P: PropagatorSet, u0: np.ndarray, i: int) -> np.ndarray:
    """I₀(t_i, ·) = Γ(t_i; 0) u0。"""
    u0 = np.asarray(u0, dtype=float)
    if not np.all(np.isfinite(u0)):
        raise ShapeError("初值必须有界")
    return P.apply(u0, i, 0)


def initial_history(P: PropagatorSet, u0: np.ndarray) -> np.ndarray:
    """所有时间节点上的 I₀，形状为 (M+1, *grid.shape)。"""
    u0 = np.asarray(u0, dtype=float)
    if not np.all(np.isfinite(u0)):
        raise ShapeError("初值必须有界")
    out = np.empty((P.time_grid.steps + 1, *P.grid.shape))
    out[0] = u0
    for n in range(P.time_grid.steps):
        out[n + 1] = P.step(out[n], n)
    return out


def _check_noise(P: PropagatorSet, noise: np.ndarray) -> np.ndarray:
    noise = np.asarray(noise, dtype=float)
    expected = (P.time_grid.steps, *P.grid.shape)
    if noise.shape[noise.ndim - len(expected) :] != expected:
        raise ShapeError(f"噪声路径形状 {noise.shape} 与 {expected} 不符")
    return noise


def euler_march(
    P: PropagatorSet, coeff: Coefficients, u0: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    """
    指数 Euler 推进 u_{n+1} = Γ(t_{n+1}; t_n)[u_n + b(t_n, u_n) dt + σ(t_n, u_n) ΔW_n]。

    Args:
        P: 传播子。
        coeff: 方程系数。
        u0: 初值。
        noise: 形状为 (..., M, *grid.shape) 的噪声增量，前置维为路径批量。

    Returns:
        np.ndarray: 形状为 (..., M+1, *grid.shape) 的解。

    Raises:
        BlowUpError: 出现非有限值。
    """
    noise = _check_noise(P, noise)
    batch = noise.shape[: noise.ndim - P.grid.k - 1]
    steps = P.time_grid.steps
    times = P.time_grid.times
    out = np.empty((*batch, steps + 1, *P.grid.shape))
    time_axis = len(batch)
    out_view = np.moveaxis(out, time_axis, 0)
    noise_view = np.moveaxis(noise, time_axis, 0)
    out_view[0] = np.broadcast_to(np.asarray(u0, dtype=float), out_view.shape[1:])
    dt = P.dt
    for n in range(steps):
        u = out_view[n]
        t = float(times[n])
        rhs = u + evaluate(coeff.drift, t, P.grid, u) * dt
        rhs = rhs + evaluate(coeff.sigma, t, P.grid, u) * noise_view[n]
        nxt = P.step(rhs, n)
        if not np.all(np.isfinite(nxt)):
            logger.error(f"时间推进在第 {n + 1} 步出现非有限值")
            raise BlowUpError(f"解在第 {n + 1} 步 (t={times[n + 1]:.6g}) 出现非有限值", step=n + 1)
        out_view[n + 1] = nxt
    return out


def euler_solve(
    P: PropagatorSet,
    coeff: Coefficients,
    model: CovarianceModel,
    u0: np.ndarray,
    seed: int,
    noise: np.ndarray | None = None,
) -> SolutionField:
    """
    单条路径的指数 Euler 解。

    Args:
        P: 传播子。
        coeff: 方程系数。
        model: 噪声协方差。
        u0: 初值。
        seed: 路径种子，噪声由 np.random.default_rng(seed) 采样。
        noise: 已采样的噪声路径，给定时忽略 seed 的采样。

    Returns:
        SolutionField: 解场，给定种子时逐位可复现。
    """
    if noise is None:
        noise = sample_path(P.grid, model, P.time_grid, np.random.default_rng(seed))
    values = euler_march(P, coeff, u0, noise)
    return SolutionField(grid=P.grid, time_grid=P.time_grid, values=values, seed=seed)


def mild_sources(
    P: PropagatorSet, coeff: Coefficients, values: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    """s_j = σ(t_j, u_j) ΔW_j + b(t_j, u_j) dt，j = 0..M-1，前置维为路径批量。"""
    noise = _check_noise(P, noise)
    time_axis = noise.ndim - P.grid.k - 1
    u_view = np.moveaxis(values, time_axis, 0)
    noise_view = np.moveaxis(noise, time_axis, 0)
    sources = np.empty(noise_view.shape)
    for j, t in enumerate(P.time_grid.times[:-1]):
        u = u_view[j]
        sources[j] = evaluate(coeff.sigma, float(t), P.grid, u) * noise_view[j]
        sources[j] += evaluate(coeff.drift, float(t), P.grid, u) * P.dt
    return np.moveaxis(sources, 0, time_axis)


def mild_residual(
    P: PropagatorSet,
    coeff: Coefficients,
    field: SolutionField,
    noise: np.ndarray,
) -> float:
    """
    离散 mild 恒等式的残差 max |u(t_i) - I₀(t_i) - Σ_{j<i} Γ(t_i; t_j)(σ_j ΔW_j + b_j dt)|。
    """
    if field.grid != P.grid or field.time_grid != P.time_grid:
        raise ShapeError("解场与传播子的网格不一致")
    sources = mild_sources(P, coeff, field.values, noise)
    convolution = P.convolve(sources)
    history = initial_history(P, field.values[0])
    return float(np.max(np.abs(field.values - history - convolution)))
