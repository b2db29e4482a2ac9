import math
from dataclasses import dataclass, field

import numpy as np

from ..common.types import ParameterDomainError, Representation, ShapeError  # type: ignore
from ..common.utils import checked_quad, integration_retry  # type: ignore
from .kernel import dominating_kernel
from .propagator import PropagatorSet

MASS_TOLERANCE = 1e-3
NEGATIVITY_SLACK = 1e-8
# 低于 max 响应 × 该比例的点视为舍入噪声，不参与界的拟合
SIGNIFICANCE = 1e-10


@dataclass
class StepDiagnostics:
    """单步算子的质量与近正性诊断。"""

    mass_min: float
    mass_max: float
    worst_negative: float
    positivity_ok: bool
    mass_ok: bool


@dataclass
class GaussianBoundReport:
    """
    高斯界 Γ(t,x;s,y) ≤ C (t-s)^{-k/2} exp(-c|x-y|²/(t-s)) 的拟合结果。

    Args:
        c (float): 给定的指数常数。
        fitted_constant (float): 所有显著点上的最小可行 C。
        constant (float): 检查违例所用的 C (给定值或拟合值)。
        violations (int): 显著点中违反界的个数。
        checked_points (int): 参与检查的显著点个数。
        far_field_ratio (float): 远场显著点上 Γ / (C S) 的最大值。
        per_lag (list[dict]): 每个时间差上的最大比值。
    """

    c: float
    fitted_constant: float
    constant: float
    violations: int
    checked_points: int
    far_field_ratio: float
    per_lag: list[dict] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "fitted_constant": self.fitted_constant,
            "constant": self.constant,
            "violations": self.violations,
            "checked_points": self.checked_points,
            "far_field_ratio": self.far_field_ratio,
            "per_lag": self.per_lag,
        }


@dataclass
class KernelIncrementReport:
    """核增量和 J(λ) 及其 log-log 斜率。"""

    direction: str
    delta: float
    lags: list[float]
    values: list[float]
    slope: float
    constant: float


def step_matrix(P: PropagatorSet, j: int = 0) -> np.ndarray:
    """稠密单步矩阵，第 y 列为单位向量 e_y 的单步响应。"""
    n = P.grid.size
    basis = np.eye(n).reshape(n, *P.grid.shape)
    return P.step(basis, j).reshape(n, n).T


def step_diagnostics(P: PropagatorSet, j: int = 0) -> StepDiagnostics:
    """
    单步算子的行和 (质量) 与最负元素。

    近正性以每行最大元素的 NEGATIVITY_SLACK 倍为容差。
    """
    matrix = step_matrix(P, j)
    mass = matrix.sum(axis=1)
    row_max = np.abs(matrix).max(axis=1, keepdims=True)
    relative = matrix / row_max
    worst = float(relative.min())
    return StepDiagnostics(
        mass_min=float(mass.min()),
        mass_max=float(mass.max()),
        worst_negative=worst,
        positivity_ok=worst >= -NEGATIVITY_SLACK,
        mass_ok=bool(np.all(np.abs(mass - 1) <= MASS_TOLERANCE)),
    )


def probe_bumps(P: PropagatorSet, count: int = 3) -> np.ndarray:
    """宽度 4h 的单位质量高斯探针，中心沿对角线均匀分布。"""
    grid = P.grid
    width = 4 * grid.h
    probes = []
    for n in range(count):
        center = tuple([n * grid.N // count] * grid.k)
        r2 = np.sum(grid.displacement(center) ** 2, axis=-1)
        bump = np.exp(-r2 / (2 * width**2))
        probes.append(bump / (bump.sum() * grid.cell_volume))
    return np.stack(probes)


def semigroup_residual(
    P: PropagatorSet,
    i: int,
    r: int,
    j: int,
    reference: PropagatorSet | None = None,
) -> float:
    """
    半群性质的残差 max_探针 ‖Γ(t_j;t_i) u - Γ(t_j;t_r) Γ(t_r;t_i) u‖_{L¹}。

    步进算子的复合按构造精确成立，此时改为与时间步减半的参考传播子比较。
    i = r 或 r = j 的退化三元组返回 0。

    Args:
        P: 传播子。
        i, r, j: 时间下标，i ≤ r ≤ j。
        reference: 步进算子的参考传播子，默认取 P.refined(2)。
    """
    if not 0 <= i <= r <= j <= P.time_grid.steps:
        raise ShapeError(f"时间下标必须满足 0 ≤ i ≤ r ≤ j ≤ M (i={i}, r={r}, j={j})")
    if i == r or r == j:
        return 0.0
    probes = probe_bumps(P)
    composed = P.apply(P.apply(probes, r, i), j, r)
    if P.representation is Representation.SpectralMultiplier:
        direct = P.apply(probes, j, i)
    else:
        if reference is None:
            reference = P.refined(2)
        factor = reference.time_grid.steps // P.time_grid.steps
        direct = reference.apply(probes, j * factor, i * factor)
    axes = tuple(range(1, probes.ndim))
    norms = P.grid.cell_volume * np.sum(np.abs(composed - direct), axis=axes)
    return float(norms.max())


def gaussian_bound_check(
    P: PropagatorSet,
    probes: list[tuple[int, ...]] | None = None,
    c: float = 0.15,
    steps: list[int] | None = None,
    constant: float | None = None,
    far_factor: float = 64.0,
) -> GaussianBoundReport:
    """
    对点源响应拟合 Γ ≤ C S(t-s, x-y) 中的最小 C。

    Args:
        P: 传播子，建议 b = c = 0。
        probes: 点源位置，默认取原点与盒中心。
        c: 指数常数。
        steps: 检查的时间差 (步数)，默认取 1, 2, 4, ... ≤ M。
        constant: 给定时以它统计违例，否则以拟合值统计。
        far_factor: |x-y|² ≥ far_factor (t-s) 的点视为远场。

    Returns:
        GaussianBoundReport: 拟合报告。
    """
    grid = P.grid
    probes = probes or [(0,) * grid.k, (grid.N // 2,) * grid.k]
    if steps is None:
        steps = [2**e for e in range(int(math.log2(P.time_grid.steps)) + 1)]
    steps = sorted(set(int(s) for s in steps))
    if steps[0] < 1 or steps[-1] > P.time_grid.steps:
        raise ParameterDomainError(f"时间差步数必须位于 [1, M] 内 (steps={steps})")

    records = []
    for site in probes:
        displacement = grid.displacement(site)
        r2 = np.sum(displacement**2, axis=-1)
        response = np.zeros(grid.shape)
        response[site] = 1 / grid.cell_volume
        done = 0
        for m in steps:
            response = P.apply(response, m, done)
            done = m
            lag = m * P.dt
            significant = response > SIGNIFICANCE * response.max()
            bound = dominating_kernel(lag, displacement, c)
            ratio = np.where(significant, response / np.maximum(bound, np.finfo(float).tiny), 0.0)
            far = significant & (r2 >= far_factor * lag)
            records.append((lag, ratio, significant, far))

    fitted = max(float(rec[1].max()) for rec in records)
    used = fitted if constant is None else constant
    violations = sum(int(np.sum(rec[1] > used * (1 + 1e-9))) for rec in records)
    checked = sum(int(rec[2].sum()) for rec in records)
    far_values = [float(rec[1][rec[3]].max()) for rec in records if rec[3].any()]
    per_lag = [{"lag": rec[0], "max_ratio": float(rec[1].max())} for rec in records]
    return GaussianBoundReport(
        c=c,
        fitted_constant=fitted,
        constant=used,
        violations=violations,
        checked_points=checked,
        far_field_ratio=(max(far_values) / used) if far_values else 0.0,
        per_lag=per_lag,
    )


@integration_retry(max_retries=3, base_limit=200)
def _increment_integral(delta: float, *, limit: int) -> float:
    # ∫_0^1 r^{δ-1} log(1+r) dr + ∫_0^1 r^{δ-1}(-log r) dr + ∫_1^∞ r^{δ-1} log(1+1/r) dr
    near, _ = checked_quad(math.log1p, 0.0, 1.0, limit=limit, weight="alg", wvar=(delta - 1, 0.0))
    far, _ = checked_quad(
        lambda r: r ** (delta - 1) * math.log1p(1 / r), 1.0, math.inf, limit=limit
    )
    return near + 1 / delta**2 + far


def kernel_increment_constant(delta: float) -> tuple[float, float]:
    """
    C_δ = ∫_0^∞ r^{δ-1} log(1+1/r) dr = π/(δ sin πδ)。

    Returns:
        tuple[float, float]: 闭式值与数值积分值。
    """
    if not 0 < delta < 1:
        raise ParameterDomainError(f"δ 必须位于 ]0,1[ 内 (δ={delta})")
    return math.pi / (delta * math.sin(math.pi * delta)), _increment_integral(delta)


def kernel_increment_check(
    P: PropagatorSet,
    delta: float,
    lags: list[int],
    direction: str = "time",
    t_index: int | None = None,
    site: tuple[int, ...] | None = None,
) -> KernelIncrementReport:
    """
    核增量和的离散版本。

    时间方向: J(λ) = Σ_{j<i} dt (t_i - t_j)^{δ-1} h^k Σ_x |Γ(t_i+λ, x; t_j, y) - Γ(t_i, x; t_j, y)|；
    空间方向: J(ℓ) = Σ_{j<i} dt h^k Σ_x |Γ(t_i, x+ℓ; t_j, y) - Γ(t_i, x; t_j, y)|。
    两者都在点源 y 的前向响应上度量。

    Args:
        P: 传播子。
        delta: 时间方向的指数 δ ∈ ]0,1[。
        lags: 步长 (时间方向为步数，空间方向为沿第一轴的格点数)。
        direction: "time" 或 "space"。
        t_index: 观测时间下标，默认取 M/2。
        site: 点源位置，默认取原点。
    """
    if direction not in ("time", "space"):
        raise ParameterDomainError(f"未知方向: {direction}")
    grid = P.grid
    steps = P.time_grid.steps
    i = steps // 2 if t_index is None else t_index
    site = site or (0,) * grid.k
    lags = sorted(int(lag) for lag in lags)
    if direction == "time" and i + lags[-1] > steps:
        raise ParameterDomainError("时间步长超出时间网格")
    values = np.zeros(len(lags))
    for j in range(i):
        base = P.delta_response(site, i, j)
        weight = P.dt * ((i - j) * P.dt) ** (delta - 1) if direction == "time" else P.dt
        for n, lag in enumerate(lags):
            if direction == "time":
                other = P.apply(base, i + lag, i)
            else:
                other = np.roll(base, -lag, axis=0)
            values[n] += weight * grid.cell_volume * np.sum(np.abs(other - base))
    unit = P.dt if direction == "time" else grid.h
    physical = np.asarray(lags, dtype=float) * unit
    slope = float(np.polyfit(np.log(physical), np.log(values), 1)[0]) if len(lags) > 1 else math.nan
    return KernelIncrementReport(
        direction=direction,
        delta=delta,
        lags=physical.tolist(),
        values=values.tolist(),
        slope=slope,
        constant=kernel_increment_constant(delta)[0] if direction == "time" else 1.0,
    )
