from collections.abc import Sequence

import numpy as np

from ..common.types import ParameterDomainError, ShapeError, SolutionField  # type: ignore


class MomentAccumulator:
    """
    逐格点的 p 阶绝对矩累加器。

    保存路径数、Σ|u|^p 与 Σ|u|^{2p}。merge 满足结合律，
    调用方按路径编号顺序合并即可得到与调度无关的结果。
    """

    __slots__ = ("p", "count", "power_sum", "square_sum")

    def __init__(self, shape: tuple[int, ...], p: float = 2.0) -> None:
        if p < 1:
            raise ParameterDomainError(f"矩的阶数必须不小于 1 (p={p})")
        self.p = float(p)
        self.count = 0
        self.power_sum = np.zeros(shape)
        self.square_sum = np.zeros(shape)

    @classmethod
    def from_values(cls, values: np.ndarray, p: float = 2.0) -> "MomentAccumulator":
        """由形状为 (paths, *shape) 的批量构造。"""
        values = np.asarray(values, dtype=float)
        acc = cls(values.shape[1:], p)
        acc.add(values)
        return acc

    def add(self, values: np.ndarray) -> None:
        """加入一条路径 (形状为 shape) 或一批路径 (形状为 (n, *shape))。"""
        values = np.asarray(values, dtype=float)
        if values.shape == self.power_sum.shape:
            values = values[None]
        if values.shape[1:] != self.power_sum.shape:
            raise ShapeError(f"路径形状 {values.shape[1:]} 与累加器 {self.power_sum.shape} 不符")
        powered = np.abs(values) ** self.p
        self.count += values.shape[0]
        self.power_sum += powered.sum(axis=0)
        self.square_sum += (powered * powered).sum(axis=0)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.p != self.p or other.power_sum.shape != self.power_sum.shape:
            raise ShapeError("只能合并阶数与形状相同的累加器")
        out = MomentAccumulator(self.power_sum.shape, self.p)
        out.count = self.count + other.count
        out.power_sum = self.power_sum + other.power_sum
        out.square_sum = self.square_sum + other.square_sum
        return out

    def moment(self) -> np.ndarray:
        if self.count == 0:
            raise ShapeError("累加器为空")
        return self.power_sum / self.count

    def standard_error(self) -> np.ndarray:
        if self.count < 2:
            raise ShapeError("标准误差至少需要 2 条路径")
        mean = self.power_sum / self.count
        variance = np.maximum(self.square_sum / self.count - mean * mean, 0.0)
        return np.sqrt(variance / (self.count - 1))

    def sup(self) -> tuple[float, float]:
        """max 格点 E|u|^p 及该格点处的标准误差。"""
        moment = self.moment()
        index = np.unravel_index(int(np.argmax(moment)), moment.shape)
        se = float(self.standard_error()[index]) if self.count > 1 else float("nan")
        return float(moment[index]), se


def _stack_paths(paths: Sequence[SolutionField]) -> np.ndarray:
    if len(paths) < 2:
        raise ParameterDomainError(f"至少需要 2 条路径 (当前 {len(paths)})")
    first = paths[0]
    for path in paths[1:]:
        if path.grid != first.grid or path.time_grid != first.time_grid:
            raise ShapeError("所有路径必须位于同一时空网格上")
    return np.stack([path.values for path in paths])


def moment_sup(paths: Sequence[SolutionField], p: float = 2.0) -> float:
    """sup_{(t_i, x_j)} 的样本 p 阶绝对矩。"""
    if p < 2:
        raise ParameterDomainError(f"矩的阶数必须不小于 2 (p={p})")
    return MomentAccumulator.from_values(_stack_paths(paths), p).sup()[0]


def moment_sup_with_error(paths: Sequence[SolutionField], p: float = 2.0) -> tuple[float, float]:
    """moment_sup 及其在最大值格点处的标准误差。"""
    if p < 2:
        raise ParameterDomainError(f"矩的阶数必须不小于 2 (p={p})")
    return MomentAccumulator.from_values(_stack_paths(paths), p).sup()
