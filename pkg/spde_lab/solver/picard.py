import numpy as np

from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    BlowUpError,
    Coefficients,
    ConfigError,
    CovarianceModel,
    ParameterDomainError,
    PicardTrace,
    SolutionField,
)
from ..greens import PropagatorSet  # type: ignore
from ..noise import sample_path  # type: ignore
from .euler import _check_noise, initial_history, mild_sources

# 全历史卷积的代价为 O(M²)，压缩实验的时间步数上限
PICARD_MAX_STEPS = 256
DEFAULT_TOLERANCE = 1e-6


def _sup_moment(values: np.ndarray, p: float) -> float:
    return float(np.max(np.mean(np.abs(values) ** p, axis=0)))


def picard_iterate(
    P: PropagatorSet,
    coeff: Coefficients,
    noise: np.ndarray,
    u0: np.ndarray,
    max_iter: int = 50,
    p: float = 2.0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> tuple[np.ndarray, PicardTrace]:
    """
    在一批固定噪声路径上做 Picard 迭代。

    u⁰ = I₀；u^{n+1}(t_i) = I₀(t_i) + Σ_{j<i} Γ(t_i; t_j)[σ(t_j, u^n_j) ΔW_j + b(t_j, u^n_j) dt]。
    M_n = max_格点 (1/B) Σ_路径 |u^{n+1} - u^n|^p，当 M_n < tolerance·(1 + max_格点 E|u^{n+1}|^p) 时停止。

    Args:
        P: 传播子。
        coeff: 方程系数。
        noise: 形状为 (B, M, *grid.shape) 的噪声路径批量。
        u0: 初值。
        max_iter: 最大迭代次数，不小于 2。
        p: 矩的阶数。
        tolerance: 相对停止容差。

    Returns:
        tuple[np.ndarray, PicardTrace]: 形状为 (B, M+1, *grid.shape) 的最后迭代与迭代轨迹。

    Raises:
        ConfigError: max_iter < 2。
        ParameterDomainError: M 超过 PICARD_MAX_STEPS。
        BlowUpError: 迭代出现非有限值。
    """
    if max_iter < 2:
        raise ConfigError(f"Picard 最大迭代次数必须不小于 2 (max_iter={max_iter})")
    steps = P.time_grid.steps
    if steps > PICARD_MAX_STEPS:
        raise ParameterDomainError(
            f"Picard 迭代的时间步数不得超过 {PICARD_MAX_STEPS} (M={steps})"
        )
    noise = _check_noise(P, noise)
    if noise.ndim == P.grid.k + 1:
        noise = noise[None]

    history = initial_history(P, u0)
    current = np.broadcast_to(history, (noise.shape[0], *history.shape)).copy()
    weights = np.tril(np.ones((steps + 1, steps)), -1)
    trace = PicardTrace(p=p)
    trace.moment_sups.append(_sup_moment(current, p))

    for n in range(max_iter):
        sources = mild_sources(P, coeff, current, noise)
        nxt = history + P.convolve(sources, weights)
        if not np.all(np.isfinite(nxt)):
            bad = np.argwhere(~np.isfinite(nxt))[0]
            raise BlowUpError(f"Picard 第 {n + 1} 次迭代在时间步 {bad[1]} 出现非有限值", step=int(bad[1]))
        difference = _sup_moment(nxt - current, p)
        moment = _sup_moment(nxt, p)
        trace.differences.append(difference)
        trace.moment_sups.append(moment)
        trace.iterations = n + 1
        current = nxt
        logger.debug(f"Picard 第 {n + 1} 次迭代: M_n={difference:.3e}, sup E|u|^p={moment:.4g}")
        if difference < tolerance * (1 + moment):
            trace.converged = True
            break

    if not trace.converged:
        logger.warning(f"Picard 迭代在 {max_iter} 次内未收敛 (最后 M_n={trace.differences[-1]:.3e})")
    return current, trace


def picard_solve(
    P: PropagatorSet,
    coeff: Coefficients,
    model: CovarianceModel,
    u0: np.ndarray,
    seed: int,
    max_iter: int = 50,
    p: float = 2.0,
    tolerance: float = DEFAULT_TOLERANCE,
    noise: np.ndarray | None = None,
) -> tuple[SolutionField, PicardTrace]:
    """单条路径的 Picard 迭代，所有迭代共用同一噪声实现。"""
    if noise is None:
        noise = sample_path(P.grid, model, P.time_grid, np.random.default_rng(seed))
    values, trace = picard_iterate(P, coeff, noise, u0, max_iter, p, tolerance)
    field = SolutionField(grid=P.grid, time_grid=P.time_grid, values=values[0], seed=seed)
    return field, trace
