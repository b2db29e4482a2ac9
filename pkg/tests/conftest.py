import json
from pathlib import Path

import numpy as np
import pytest

from spde_lab.common import CovarianceModel, SpatialGrid, TimeGrid
from spde_lab.greens import build_propagator, laplacian_operator, sinusoidal_operator


@pytest.fixture
def grid() -> SpatialGrid:
    return SpatialGrid(1, 16, 1.0)


@pytest.fixture
def time_grid() -> TimeGrid:
    return TimeGrid(0.1, 8)


@pytest.fixture
def white() -> CovarianceModel:
    return CovarianceModel.white(1)


@pytest.fixture
def heat(grid, time_grid):
    """常系数热方程的谱传播子。"""
    return build_propagator(laplacian_operator(1), grid, time_grid)


@pytest.fixture
def variable_heat(grid, time_grid):
    """正弦扩散系数的 Crank–Nicolson 传播子。"""
    return build_propagator(sinusoidal_operator(1, grid.L, 1.0, 0.5), grid, time_grid)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def write_config(tmp_path):
    """把字典写成 JSON 配置文件并返回路径。"""

    def write(document: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document, ensure_ascii=False), encoding="utf-8")
        return path

    return write


def small_document(kind: str, **sections) -> dict:
    """各测试共用的小规模配置。"""
    document = {
        "experiment": {"kind": kind, "paths": 4, "seed": 7, "threads": 1},
        "covariance": {"kind": "white", "k": 1},
        "grid": {"N": 16, "L": 1.0},
        "time": {"T": 0.1, "M": 8},
    }
    for name, values in sections.items():
        document.setdefault(name, {}).update(values)
    return document
