import math

import numpy as np

from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    AnalyticRule,
    ConditionVerdict,
    CovarianceModel,
    ParameterDomainError,
)
from ..common.utils import checked_quad, integration_retry  # type: ignore
from .factory import create_covariance

DEFAULT_RADII = (16.0, 64.0, 256.0, 1024.0)
DEFAULT_THRESHOLD = 0.01
# ŝ 高于该值视为尾部可积
DEFAULT_TAIL_FLOOR = 0.02


@integration_retry(max_retries=4, base_limit=200)
def _inner_ball(angular, power, smooth, eta, radius, *, limit: int) -> float:
    # 原点处 ρ^p 的奇性交给 QAWS 的代数权重处理
    def integrand(rho: float) -> float:
        return float(np.squeeze(smooth(np.array([rho])))) * (1 + rho * rho) ** (-eta)

    value, _ = checked_quad(
        integrand, 0.0, radius, limit=limit, weight="alg", wvar=(power, 0.0)
    )
    return angular * value


@integration_retry(max_retries=4, base_limit=200)
def _shell(angular, power, smooth, eta, inner, outer, *, limit: int) -> float:
    # s = ln ρ
    def integrand(s: float) -> float:
        rho = math.exp(s)
        g = float(np.squeeze(smooth(np.array([rho]))))
        return rho ** (power + 1) * g * (1 + rho * rho) ** (-eta)

    value, _ = checked_quad(integrand, math.log(inner), math.log(outer), limit=limit)
    return angular * value


def truncated_integrals(
    model: CovarianceModel, eta: float, radii: tuple[float, ...] = DEFAULT_RADII
) -> list[float]:
    """
    计算 ∫_{|ξ|≤R} μ(dξ)/(1+|ξ|²)^η 在各截断半径上的值。

    Returns:
        list[float]: 与 radii 对应的累积积分值。
    """
    angular, power, smooth = create_covariance(model).radial_measure()
    values = [_inner_ball(angular, power, smooth, eta, radii[0])]
    for inner, outer in zip(radii, radii[1:]):
        values.append(values[-1] + _shell(angular, power, smooth, eta, inner, outer))
    return values


def decide_condition(
    model: CovarianceModel,
    eta: float,
    radii: tuple[float, ...] = DEFAULT_RADII,
    threshold: float = DEFAULT_THRESHOLD,
    tail_floor: float = DEFAULT_TAIL_FLOOR,
) -> ConditionVerdict:
    """
    判定 ∫ μ(dξ)/(1+|ξ|²)^η < ∞。

    解析规则可用时结论取解析规则，截断积分只作一致性探测；
    自定义谱密度没有解析规则，结论取数值饱和判定。

    Args:
        model (CovarianceModel): 协方差模型。
        eta (float): η ∈ ]0,1]。
        radii (tuple[float, ...]): 递增的截断半径，至少三个。
        threshold (float): 相对增长饱和阈值。
        tail_floor (float): 尾部指数饱和阈值。

    Returns:
        ConditionVerdict: 判定结果。

    Raises:
        ParameterDomainError: η 不在 ]0,1] 内或半径不合法。
    """
    if not 0 < eta <= 1:
        raise ParameterDomainError(f"η 必须位于 ]0,1] 内 (η={eta})")
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ParameterDomainError(f"截断半径必须为至少三个递增正数 (radii={radii})")

    provider = create_covariance(model)
    values = truncated_integrals(model, eta, radii)
    growth = (values[-1] - values[-2]) / values[-2] if values[-2] > 0 else math.inf
    last, prev = values[-1] - values[-2], values[-2] - values[-3]
    if last > 0 and prev > 0:
        tail = -math.log(last / prev) / math.log(radii[-1] / radii[-2])
    else:
        tail = math.inf
    saturates = growth < threshold or tail > tail_floor

    analytic = provider.analytic_condition(eta)
    holds = saturates if analytic is None else analytic
    rule = provider.rule if analytic is not None else AnalyticRule.NumericalOnly

    if analytic is not None and analytic != saturates:
        logger.warning(
            f"{model.kind.value} 条件的解析结论 ({analytic}) 与数值探测不一致: "
            f"增长 {growth:.4g}, 尾部指数 {tail:.4g}"
        )
    if analytic is False and not all(b > a for a, b in zip(values, values[1:])):
        logger.warning(f"{model.kind.value} 发散判定下截断积分未严格递增: {values}")

    return ConditionVerdict(
        holds=bool(holds),
        rule=rule,
        truncated_value=values[-1],
        radii=list(radii),
        values=values,
        growth=growth,
        tail_exponent=tail,
        numeric_saturates=bool(saturates),
        eta=eta,
    )


def dalang_condition(model: CovarianceModel, **kwargs) -> ConditionVerdict:
    """∫ μ(dξ)/(1+|ξ|²) < ∞，即 η = 1 的特例。"""
    return decide_condition(model, 1.0, **kwargs)
