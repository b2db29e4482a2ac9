from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from .grid import SpatialGrid, TimeGrid


class CovarianceKind(Enum):
    White = "white"
    Riesz = "riesz"
    Bessel = "bessel"
    Fractional = "fractional"
    CustomSpectral = "custom"


class AnalyticRule(Enum):
    White = "k<2η"
    Riesz = "0<β<min(k,2η)"
    Bessel = "α>k-2η"
    Fractional = "ΣH>k-η"
    NumericalOnly = "numerical-only"


class Representation(Enum):
    SpectralMultiplier = "spectral"
    StepOperator = "step"


class Direction(Enum):
    Time = "time"
    Space = "space"


class ExperimentKind(Enum):
    ConditionCheck = "check"
    Solve = "solve"
    Picard = "picard"
    Factorization = "factorize"
    Regularity = "regularity"
    NoiseValidate = "noise"


class RunStatus(Enum):
    Running = "running"
    Complete = "complete"
    Partial = "partial"
    Failed = "failed"


# 频域密度: (..., k) 频率数组 -> (...) 非负数组
SpectralDensity = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CovarianceModel:
    """
    空间协方差模型。

    Args:
        kind (CovarianceKind): 协方差族。
        k (int): 空间维数。
        beta (float | None): Riesz 指数 β。
        alpha (float | None): Bessel 指数 α。
        hurst (tuple[float, ...] | None): 各坐标轴的 Hurst 指数。
        density (SpectralDensity | None): 自定义谱密度。
        label (str): 自定义谱密度的可读描述。
    """

    kind: CovarianceKind
    k: int = 1
    beta: float | None = None
    alpha: float | None = None
    hurst: tuple[float, ...] | None = None
    density: SpectralDensity | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterDomainError(f"空间维数 k 必须为正整数 (k={self.k})")
        if self.kind is CovarianceKind.Riesz:
            if self.beta is None or not 0 < self.beta < self.k:
                raise ParameterDomainError(
                    f"Riesz 指数 β 必须位于 ]0,k[ 内 (β={self.beta}, k={self.k})"
                )
        elif self.kind is CovarianceKind.Bessel:
            if self.alpha is None or not self.alpha > 0:
                raise ParameterDomainError(f"Bessel 指数 α 必须大于 0 (α={self.alpha})")
        elif self.kind is CovarianceKind.Fractional:
            if self.hurst is None or len(self.hurst) != self.k:
                raise ParameterDomainError(
                    f"Hurst 向量长度必须等于 k (H={self.hurst}, k={self.k})"
                )
            if any(not 0.5 < h < 1 for h in self.hurst):
                raise ParameterDomainError(
                    f"每个 H_j 必须位于 ]1/2,1[ 内 (H={self.hurst})"
                )
            if not sum(self.hurst) > self.k - 1:
                raise ParameterDomainError(
                    f"Hurst 指数之和必须大于 k-1 (ΣH={sum(self.hurst)}, k={self.k})"
                )
        elif self.kind is CovarianceKind.CustomSpectral:
            if self.density is None:
                raise ParameterDomainError("自定义谱协方差缺少谱密度函数")

    @classmethod
    def white(cls, k: int = 1) -> "CovarianceModel":
        return cls(CovarianceKind.White, k)

    @classmethod
    def riesz(cls, beta: float, k: int = 1) -> "CovarianceModel":
        return cls(CovarianceKind.Riesz, k, beta=beta)

    @classmethod
    def bessel(cls, alpha: float, k: int = 1) -> "CovarianceModel":
        return cls(CovarianceKind.Bessel, k, alpha=alpha)

    @classmethod
    def fractional(cls, hurst: tuple[float, ...] | list[float]) -> "CovarianceModel":
        hurst = tuple(float(h) for h in hurst)
        return cls(CovarianceKind.Fractional, len(hurst), hurst=hurst)

    @classmethod
    def custom(
        cls, density: SpectralDensity, k: int = 1, label: str = "custom"
    ) -> "CovarianceModel":
        return cls(CovarianceKind.CustomSpectral, k, density=density, label=label)

    def describe(self) -> dict[str, Any]:
        """返回可写入报告的参数快照。"""
        out: dict[str, Any] = {"kind": self.kind.value, "k": self.k}
        if self.beta is not None:
            out["beta"] = self.beta
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.hurst is not None:
            out["hurst"] = list(self.hurst)
        if self.label:
            out["label"] = self.label
        out["normalization"] = "unit constants, weight = density * (2π/L)^k / (2π)^k"
        return out


@dataclass
class ConditionVerdict:
    """
    积分条件 ∫ μ(dξ)/(1+|ξ|²)^η < ∞ 的判定结果。

    Args:
        holds (bool): 条件是否成立。解析规则可用时取解析结论，否则取数值饱和结论。
        rule (AnalyticRule): 使用的解析规则。
        truncated_value (float): 最大截断半径处的截断积分值。
        radii (list[float]): 探测的截断半径。
        values (list[float]): 各半径处的截断积分值。
        growth (float): 最大两个半径之间的相对增长。
        tail_exponent (float): 由相邻壳层估计的尾部衰减指数。
        numeric_saturates (bool): 数值探测是否判定为饱和。
        eta (float): 输入的 η。
    """

    holds: bool
    rule: AnalyticRule
    truncated_value: float
    radii: list[float]
    values: list[float]
    growth: float
    tail_exponent: float
    numeric_saturates: bool
    eta: float

    @property
    def agrees(self) -> bool:
        return self.holds == self.numeric_saturates

    def to_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "rule": self.rule.value,
            "truncated_value": self.truncated_value,
            "radii": list(self.radii),
            "values": list(self.values),
            "growth": self.growth,
            "tail_exponent": self.tail_exponent,
            "numeric_saturates": self.numeric_saturates,
            "agrees": self.agrees,
            "eta": self.eta,
        }


@dataclass(frozen=True)
class NoiseIncrementField:
    """
    一个时间步上的噪声增量场 W(t_{n+1}) - W(t_n)，以格点单元指示函数为基。

    Args:
        grid (SpatialGrid): 空间网格。
        dt (float): 时间步长。
        values (np.ndarray): 形状为 grid.shape 的实数数组。
    """

    grid: SpatialGrid
    dt: float
    values: np.ndarray


# 算子系数: (t, 坐标网格元组) -> 可广播到网格形状的数组
OperatorCoefficient = Callable[[float, tuple[np.ndarray, ...]], Any]


@dataclass(frozen=True)
class OperatorSpec:
    """
    抛物算子 L = ∂_t - Σ a_ij ∂_ij + Σ b_i ∂_i + c 的系数。

    Args:
        diffusion (tuple[tuple[OperatorCoefficient, ...], ...]): 扩散系数 a_ij(t,x)。
        drift (tuple[OperatorCoefficient, ...]): 漂移系数 b_i(t,x)。
        decay (OperatorCoefficient): 零阶系数 c(t,x)。
        rho (float): 一致椭圆常数 ρ。
        constant (bool): 系数是否与 (t,x) 无关。
        time_independent (bool): 系数是否与 t 无关。
        name (str): 预设名称。
    """

    diffusion: tuple[tuple[OperatorCoefficient, ...], ...]
    drift: tuple[OperatorCoefficient, ...]
    decay: OperatorCoefficient
    rho: float
    constant: bool = False
    time_independent: bool = True
    name: str = "custom"

    @property
    def k(self) -> int:
        return len(self.drift)


# 非线性系数: (t, 坐标网格元组, z) -> 与 z 同形状的数组
FieldCoefficient = Callable[[float, tuple[np.ndarray, ...], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Coefficients:
    """
    方程右端的系数 σ(t,x,z) 与 b(t,x,z)。

    Args:
        sigma (FieldCoefficient): 噪声系数。
        drift (FieldCoefficient): 漂移系数。
        lipschitz (float): 一致 Lipschitz 常数 C。
        growth (float): 线性增长常数 c̄。
        state_dependent (bool): 系数是否依赖 z。
        name (str): 预设描述。
    """

    sigma: FieldCoefficient
    drift: FieldCoefficient
    lipschitz: float
    growth: float
    state_dependent: bool = True
    name: str = "custom"


@dataclass
class SolutionField:
    """
    单条噪声路径上的时空格点解 u(t_i, x_j)。

    Args:
        grid (SpatialGrid): 空间网格。
        time_grid (TimeGrid): 时间网格。
        values (np.ndarray): 形状为 (M+1, *grid.shape) 的数组。
        seed (int | None): 生成该路径噪声的种子。
    """

    grid: SpatialGrid
    time_grid: TimeGrid
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        expected = (self.time_grid.steps + 1, *self.grid.shape)
        if self.values.shape != expected:
            raise ShapeError(f"解场形状 {self.values.shape} 与网格 {expected} 不符")

    def at(self, i: int) -> np.ndarray:
        return self.values[i]


@dataclass
class PicardTrace:
    """
    Picard 迭代轨迹。

    Args:
        differences (list[float]): M_n = max_格点 E|u^{n+1}-u^n|^p。
        moment_sups (list[float]): 每个迭代的 max_格点 E|u^n|^p。
        iterations (int): 已执行的迭代次数。
        converged (bool): 是否在 max_iter 内收敛。
        p (float): 矩的阶数。
    """

    differences: list[float] = field(default_factory=list)
    moment_sups: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    p: float = 2.0

    @property
    def ratios(self) -> list[float]:
        out = []
        for prev, cur in zip(self.differences, self.differences[1:]):
            if prev == 0:
                out.append(0.0 if cur == 0 else math.inf)
            else:
                out.append(cur / prev)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "differences": list(self.differences),
            "moment_sups": list(self.moment_sups),
            "ratios": self.ratios,
            "iterations": self.iterations,
            "converged": self.converged,
            "p": self.p,
        }


@dataclass(frozen=True)
class FactorizationConfig:
    """
    因子分解方法的参数。

    Args:
        delta (float): 指数 δ，须满足 0 < δ < (1-η)/2。
        eta (float): 协方差条件中的 η ∈ ]0,1[。
        rule (str): 乘积积分规则，"left" 或 "right"。
    """

    delta: float
    eta: float
    rule: str = "left"

    def __post_init__(self) -> None:
        if not 0 < self.eta < 1:
            raise ConfigError(f"因子分解的 η 必须位于 ]0,1[ 内 (η={self.eta})")
        if not 0 < self.delta < (1 - self.eta) / 2:
            raise ConfigError(
                f"因子分解的 δ 必须位于 ]0,(1-η)/2[ 内 (δ={self.delta}, η={self.eta})"
            )
        if self.rule not in ("left", "right"):
            raise ConfigError(f"未知的乘积积分规则: {self.rule}")


@dataclass
class IncrementMomentTable:
    """
    增量矩表 E|u(t+λ,x)-u(t,x)|^p 或其空间版本。

    Args:
        p (float): 矩的阶数。
        direction (Direction): 时间或空间方向。
        lags (np.ndarray): 严格递增的正步长。
        moments (np.ndarray): 各步长的矩估计。
        standard_errors (np.ndarray): 各步长的标准误差。
        n_paths (int): 路径数。
        unit (float): 网格单位 (dt 或 h)。
        extent (float): 区域尺度 (T 或 L)。
        anchors (dict[str, Any]): 锚点策略快照。
    """

    p: float
    direction: Direction
    lags: np.ndarray
    moments: np.ndarray
    standard_errors: np.ndarray
    n_paths: int
    unit: float
    extent: float
    anchors: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.lags) <= 0):
            raise ConfigError("增量步长必须严格递增")
        if np.any(self.moments < 0) or np.any(self.standard_errors < 0):
            raise DegenerateDataError("增量矩与标准误差必须非负")


@dataclass
class ExponentFit:
    """
    单个方向的 Hölder 指数拟合结果。

    Args:
        direction (Direction): 方向。
        p (float): 矩的阶数。
        gamma (float): 拟合指数 γ̂ = slope/p。
        ci (tuple[float, float]): γ̂ 的置信区间。
        slope (float): log-log 斜率。
        intercept (float): 截距。
        r_squared (float): 决定系数。
        residuals (list[float]): 拟合残差。
        window (tuple[float, float]): 拟合窗口。
        n_lags (int): 参与拟合的步长数。
        weighted (bool): 是否使用了标准误差加权。
        target (float | None): 理论上确界。
        flagged (bool): 拟合质量不足 (R² < 0.95)。
    """

    direction: Direction
    p: float
    gamma: float
    ci: tuple[float, float]
    slope: float
    intercept: float
    r_squared: float
    residuals: list[float]
    window: tuple[float, float]
    n_lags: int
    weighted: bool
    target: float | None = None
    flagged: bool = False

    @property
    def proximity(self) -> float | None:
        return None if self.target is None else self.target - self.gamma

    def to_dict(self) -> dict[str, Any]:
        return {
            "direction": self.direction.value,
            "p": self.p,
            "gamma": self.gamma,
            "ci": list(self.ci),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "residuals": list(self.residuals),
            "window": list(self.window),
            "n_lags": self.n_lags,
            "weighted": self.weighted,
            "target": self.target,
            "proximity": self.proximity,
            "flagged": self.flagged,
        }


@dataclass
class RegularityReport:
    """
    Hölder 正则性报告。

    Args:
        fits (dict[str, ExponentFit]): 按方向存放的拟合结果。
        targets (dict[str, float]): 理论目标 γ₁、γ₂。
        provenance (str): 目标的来源 (η 或 β)。
        config (dict[str, Any]): 配置快照。
    """

    fits: dict[str, ExponentFit] = field(default_factory=dict)
    targets: dict[str, float] = field(default_factory=dict)
    provenance: str = ""
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(fit.flagged for fit in self.fits.values())

    def merge(self, other: "RegularityReport") -> "RegularityReport":
        return RegularityReport(
            fits={**self.fits, **other.fits},
            targets={**self.targets, **other.targets},
            provenance=self.provenance or other.provenance,
            config={**self.config, **other.config},
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "fits": {key: fit.to_dict() for key, fit in self.fits.items()},
            "targets": dict(self.targets),
            "provenance": self.provenance,
            "flagged": self.flagged,
            "config": self.config,
        }


@dataclass
class RunRecord:
    """
    运行台账中的一次实验。

    Args:
        id (str): 运行的唯一标识符。
        kind (ExperimentKind): 实验类型。
        config_hash (str): 配置快照的 SHA-256。
        master_seed (int): 主种子。
        status (RunStatus): 运行状态。
        started_at (int): 开始时间戳。
        finished_at (int | None): 结束时间戳。
        message (str | None): 失败或部分完成时的说明。
    """

    id: str
    kind: ExperimentKind
    config_hash: str
    master_seed: int
    status: RunStatus
    started_at: int
    finished_at: int | None = None
    message: str | None = None


@dataclass
class ArtifactRecord:
    """
    运行产出的一个文件。

    Args:
        run_id (str): 所属运行。
        name (str): 相对输出目录的文件名。
        sha256 (str): 文件内容的 SHA-256。
        size (int): 字节数。
    """

    run_id: str
    name: str
    sha256: str
    size: int


class LabError(Exception):
    """
    实验室异常基类。

    Args:
        message (str): 错误描述。
    """

    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"{self.message}"


class ConfigError(LabError):
    """配置解析或校验失败。"""

    exit_code = 2


class ParameterDomainError(ConfigError):
    """参数超出其定义域。"""


class OperatorSpecError(ConfigError):
    """算子系数不满足对称性或一致椭圆性。"""


class NumericalError(LabError):
    """数值计算失败。"""

    exit_code = 3


class NumericalIntegrationError(NumericalError):
    """自适应积分未收敛。"""


class BlowUpError(NumericalError):
    """
    时间推进中出现非有限值。

    Args:
        message (str): 错误描述。
        step (int): 出错的时间步。
    """

    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(message)


class DegenerateDataError(NumericalError):
    """数据退化，无法拟合。"""


class ShapeError(NumericalError):
    """数组形状或网格不一致。"""


class InvariantViolation(NumericalError):
    """内部不变量被破坏。"""


class DBError(LabError):
    """
    数据库异常类。

    当运行记录数据库操作失败时抛出此异常。
    """
