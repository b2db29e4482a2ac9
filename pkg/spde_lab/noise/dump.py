import struct
from pathlib import Path

import numpy as np

from ..common.grid import SpatialGrid  # type: ignore
from ..common.types import ShapeError  # type: ignore

MAGIC = b"SPDENOIS"
# magic(8) k(uint32) N(uint32) dt(float64) count(uint64)，小端，共 32 字节
HEADER = struct.Struct("<8sIIdQ")


def write_noise_dump(path: str | Path, fields: np.ndarray, grid: SpatialGrid, dt: float) -> int:
    """
    把噪声场写成二进制文件。

    Args:
        path: 目标文件。
        fields: 形状为 (*grid.shape) 或 (count, *grid.shape) 的数组。
        grid: 空间网格。
        dt: 时间步长。

    Returns:
        int: 写入的字节数。
    """
    fields = np.asarray(fields, dtype=float)
    if fields.shape == grid.shape:
        fields = fields[None]
    if fields.shape[1:] != grid.shape:
        raise ShapeError(f"噪声场形状 {fields.shape[1:]} 与网格 {grid.shape} 不符")
    payload = HEADER.pack(MAGIC, grid.k, grid.N, dt, fields.shape[0])
    payload += fields.astype("<f8").tobytes(order="C")
    Path(path).write_bytes(payload)
    return len(payload)


def read_noise_dump(path: str | Path) -> tuple[dict, np.ndarray]:
    """读取二进制噪声文件，返回头信息与形状为 (count, N, ..., N) 的数组。"""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ShapeError("噪声文件过短")
    magic, k, n, dt, count = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ShapeError(f"噪声文件标识不符: {magic!r}")
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
    expected = count * n**k
    if data.size != expected:
        raise ShapeError(f"噪声文件数据长度 {data.size} 与头信息 {expected} 不符")
    header = {"k": k, "N": n, "dt": dt, "count": count}
    return header, data.reshape((count,) + (n,) * k).astype(float)
