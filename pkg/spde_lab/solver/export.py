from pathlib import Path

import numpy as np

from ..common.types import SolutionField  # type: ignore
from ..noise import write_noise_dump  # type: ignore


def solution_rows(field: SolutionField, every: int = 1) -> np.ndarray:
    """展开为 (t, x0, ..., value) 行，时间每隔 every 个节点取一次。"""
    times = field.time_grid.times[::every]
    coords = np.stack([c.reshape(-1) for c in field.grid.coordinates], axis=-1)
    blocks = []
    for i, t in zip(range(0, field.time_grid.steps + 1, every), times):
        values = field.values[i].reshape(-1, 1)
        blocks.append(np.hstack([np.full((len(values), 1), t), coords, values]))
    return np.vstack(blocks)


def export_solution(
    path: str | Path, field: SolutionField, fmt: str = "csv", every: int = 1
) -> Path:
    """
    导出解场快照。

    Args:
        path: 目标文件。
        field: 解场。
        fmt: "csv" 写出 (t, x0, ..., value) 文本；"binary" 写出与噪声文件相同的二进制格式，
            每个时间节点一个场，头信息中的 dt 为相邻快照的时间间隔。
        every: 时间抽样间隔。
    """
    path = Path(path)
    if fmt == "csv":
        header = ",".join(["t", *[f"x{a}" for a in range(field.grid.k)], "value"])
        np.savetxt(path, solution_rows(field, every), delimiter=",", fmt="%.17g", header=header, comments="")
    else:
        write_noise_dump(path, field.values[::every], field.grid, field.time_grid.dt * every)
    return path
