import math

import numpy as np

from ..common.types import ParameterDomainError  # type: ignore


def sphere_area(k: int) -> float:
    """单位球面 S^{k-1} 的面积 2π^{k/2}/Γ(k/2)。"""
    return 2 * math.pi ** (k / 2) / math.gamma(k / 2)


def ball_volume(k: int) -> float:
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def sphere_nodes(k: int) -> tuple[np.ndarray, np.ndarray]:
    """
    单位球面上的等权求积节点。

    Returns:
        tuple[np.ndarray, np.ndarray]: 形状为 (n, k) 的方向与形状为 (n,) 的权重，权重之和为球面面积。
    """
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if k == 2:
        n = 64
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1), np.full(n, 2 * np.pi / n)
    if k == 3:
        # Fibonacci 球面格点
        n = 256
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z**2)
        dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
        return dirs, np.full(n, 4 * np.pi / n)
    raise ParameterDomainError(f"自定义谱密度的数值探测只支持 k ≤ 3 (k={k})")


def as_points(values, k: int) -> tuple[np.ndarray, bool]:
    """
    把输入整理为 (..., k) 形状的点数组。

    Returns:
        tuple[np.ndarray, bool]: 点数组，以及输入是否为单个点。
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != k:
        if k != 1:
            raise ParameterDomainError(f"点坐标的最后一维必须为 k={k} (shape={arr.shape})")
        arr = arr[..., None]
    return arr, arr.ndim == 1
