import numpy as np

from ..common.grid import SpatialGrid, TimeGrid  # type: ignore
from ..common.types import OperatorSpec  # type: ignore
from .crank_nicolson import CrankNicolsonPropagator
from .operator import check_operator
from .propagator import PropagatorSet
from .spectral import SpectralPropagator


def build_propagator(
    op: OperatorSpec,
    grid: SpatialGrid,
    time_grid: TimeGrid,
    *,
    monotone: bool = True,
    rng: np.random.Generator | None = None,
    workers: int = 1,
) -> PropagatorSet:
    """
    构造离散基本解。

    常系数算子得到精确谱乘子，变系数算子得到 Crank–Nicolson 单步算子。

    Raises:
        OperatorSpecError: 对称性或椭圆性抽检失败。
        ParameterDomainError: 变系数情形下 dt > h。
    """
    check_operator(op, grid, rng or np.random.default_rng(0), T=time_grid.T)
    if op.constant:
        return SpectralPropagator(op, grid, time_grid, workers=workers)
    return CrankNicolsonPropagator(op, grid, time_grid, monotone=monotone)
