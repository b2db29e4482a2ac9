import numpy as np

from ..common.types import (  # type: ignore
    CovarianceKind,
    CovarianceModel,
    Direction,
    Representation,
    ShapeError,
)
from ..common.utils import geometric_sum  # type: ignore
from ..covariance import critical_eta, lattice_weights  # type: ignore
from ..greens import SpectralPropagator  # type: ignore


def theoretical_targets(model: CovarianceModel) -> tuple[dict[str, float], str]:
    """
    Hölder 指数的理论上确界 γ₁ = (1-η*)/2、γ₂ = 1-η*。

    Riesz 情形即 (2-β)/4 与 (2-β)/2；无解析规则的自定义谱返回空目标。
    """
    eta_star = critical_eta(model)
    if eta_star is None:
        return {}, "numerical-only"
    if model.kind is CovarianceKind.Riesz:
        provenance = f"β={model.beta:g}"
    else:
        provenance = f"η*={eta_star:g}"
    return {
        Direction.Time.value: (1 - eta_star) / 2,
        Direction.Space.value: 1 - eta_star,
    }, provenance


def linear_increment_variance(
    P: SpectralPropagator,
    model: CovarianceModel,
    t_index: int,
    lag_steps: int,
    direction: Direction,
) -> float:
    """
    线性加性方程 (σ ≡ 1, b ≡ 0, u0 ≡ 0) 的格点增量方差。

    时间: dt Σ_ξ w(ξ) [ |E^λ - 1|² Σ_{r=1}^{i} g^r + Σ_{r=1}^{λ} g^r ]；
    空间: dt Σ_ξ w(ξ) 2(1 - cos(ξ₁ ℓ)) Σ_{r=1}^{i} g^r，
    其中 E 为单步乘子，g = |E|²。

    Args:
        P: 常系数谱传播子。
        model: 噪声协方差。
        t_index: 锚点时间下标 i。
        lag_steps: 步长 (时间步数或沿第一轴的格点数)。
        direction: 方向。
    """
    if P.representation is not Representation.SpectralMultiplier:
        raise ShapeError("增量方差的格点公式只适用于常系数谱传播子")
    grid = P.grid
    weights = lattice_weights(model, grid)
    gain = P.step_gain()
    history = geometric_sum(gain, t_index)
    if direction is Direction.Time:
        jump = P.multiplier(lag_steps)
        total = np.abs(jump - 1) ** 2 * history + geometric_sum(gain, lag_steps)
    else:
        phase = grid.frequencies()[..., 0] * (lag_steps * grid.h)
        total = 2 * (1 - np.cos(phase)) * history
    return float(P.dt * np.sum(weights * total))
