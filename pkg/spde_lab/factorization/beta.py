import math

from ..common.types import ParameterDomainError  # type: ignore
from ..common.utils import checked_quad, integration_retry  # type: ignore


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise ParameterDomainError(f"δ 必须位于 ]0,1[ 内 (δ={delta})")


def beta_weight(t: float, delta: float) -> float:
    """
    ∫_0^t (t-s)^{δ-1} s^{-δ} ds = B(1-δ, δ) = π / sin(πδ)，与 t 无关。

    Raises:
        ParameterDomainError: t ≤ 0 或 δ ∉ ]0,1[。
    """
    if not t > 0:
        raise ParameterDomainError(f"t 必须为正 (t={t})")
    _check_delta(delta)
    return math.pi / math.sin(math.pi * delta)


@integration_retry(max_retries=3, base_limit=200)
def _beta_integral(t: float, delta: float, *, limit: int) -> float:
    # 权函数 (s-0)^{-δ} (t-s)^{δ-1} 交给 QAWS 处理端点奇异性
    value, _ = checked_quad(
        lambda s: 1.0, 0.0, t, limit=limit, epsabs=1e-12, epsrel=1e-12, weight="alg", wvar=(-delta, delta - 1)
    )
    return value


def beta_quadrature(delta: float, t: float = 1.0) -> float:
    """对 ∫_0^t (t-s)^{δ-1} s^{-δ} ds 做自适应数值积分。"""
    if not t > 0:
        raise ParameterDomainError(f"t 必须为正 (t={t})")
    _check_delta(delta)
    return _beta_integral(t, delta)
