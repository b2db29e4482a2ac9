import hashlib
from collections.abc import Callable
from functools import wraps
from typing import Any, TypeVar

import numpy as np
from scipy import integrate

from .log import logger
from .types import NumericalError, NumericalIntegrationError

T = TypeVar("T")


class QuadratureIncomplete(NumericalIntegrationError):
    """单次自适应积分未达到精度要求，可用更大的细分预算重试。"""


def checked_quad(
    func: Callable[..., float],
    a: float,
    b: float,
    *,
    limit: int,
    epsabs: float = 1.49e-8,
    epsrel: float = 1.49e-8,
    **kwargs: Any,
) -> tuple[float, float]:
    """
    调用 scipy.integrate.quad 并检查返回码。

    Args:
        func: 被积函数。
        a, b: 积分区间。
        limit: 细分区间上限。
        epsabs, epsrel: 绝对与相对容差。
        **kwargs: 透传给 quad 的其余参数 (weight, wvar, args 等)。

    Returns:
        tuple[float, float]: 积分值与误差估计。

    Raises:
        QuadratureIncomplete: quad 报告未收敛且误差估计超出容差。
    """
    result = integrate.quad(
        func, a, b, limit=limit, epsabs=epsabs, epsrel=epsrel, full_output=1, **kwargs
    )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3 and abserr > 10 * max(epsabs, epsrel * abs(value)):
        raise QuadratureIncomplete(
            f"quad 未收敛 (区间 [{a}, {b}], 值 {value:.6g}, 误差 {abserr:.3g}, "
            f"limit={limit}): {result[3]}"
        )
    return value, abserr


def integration_retry(
    max_retries: int = 3,
    base_limit: int = 200,
):
    """
    积分重试装饰器。

    被装饰函数须接受关键字参数 limit。未收敛时以翻倍的细分预算重试。

    Args:
        max_retries (int): 最大重试次数，默认为3。
        base_limit (int): 初始细分区间上限，默认为200。

    Returns:
        Callable[..., T]: 包装后的函数。

    Raises:
        NumericalIntegrationError: 当达到最大重试次数或发生未知错误时抛出。
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            detail = ""
            for attempt in range(max_retries):
                try:
                    return func(*args, limit=base_limit * 2**attempt, **kwargs)
                except QuadratureIncomplete as e:
                    detail = e.message
                    logger.debug(f"积分第 {attempt + 1} 次尝试未收敛: {detail}")
                    continue
                except NumericalError:
                    raise
                except Exception as e:
                    raise NumericalIntegrationError(f"积分时发生未知错误: {e!s}") from e

            raise NumericalIntegrationError(
                f"积分失败，已达到最大重试次数 ({max_retries}): {detail}"
            )

        return wrapper

    return decorator


def derive_seed(master_seed: int, index: int) -> int:
    """
    由主种子与路径编号派生路径种子。

    seed = SHA-256("{master_seed}:{index}") 前 8 字节按小端解释的 64 位无符号整数。
    """
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def path_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, index))


def geometric_sum(ratio: np.ndarray, count: int) -> np.ndarray:
    """逐元素计算 Σ_{m=1}^{count} ratio^m，ratio 接近 1 时退化为 count。"""
    ratio = np.asarray(ratio, dtype=float)
    if count <= 0:
        return np.zeros_like(ratio)
    near_one = np.abs(1.0 - ratio) < 1e-12
    safe = np.where(near_one, 0.5, ratio)
    value = safe * (1.0 - safe**count) / (1.0 - safe)
    return np.where(near_one, float(count), value)
