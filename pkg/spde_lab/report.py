import json
import math
import platform
import time
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import scipy
import sympy

from .common import ExperimentConfig  # type: ignore
from .db import file_digest  # type: ignore
from .experiment_flow import ExperimentResult  # type: ignore

REPORT_NAME = "report.json"
MANIFEST_NAME = "manifest.json"


def plain(obj: Any) -> Any:
    """转换为可 JSON 序列化的对象，非有限浮点数写为 null。"""
    if isinstance(obj, dict):
        return {str(key): plain(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    text = json.dumps(plain(obj), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_table(
    out_dir: Path, name: str, columns: list[str], data: np.ndarray, fmt: str
) -> Path:
    """按 csv 或 json 写出一张数值表，浮点数统一 17 位有效数字。"""
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        np.savetxt(path, data, delimiter=",", fmt="%.17g", header=",".join(columns), comments="")
        return path
    return write_json(out_dir / f"{name}.json", {"columns": columns, "rows": data})


def versions() -> dict[str, str]:
    from . import __version__

    return {
        "spde_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


def write_results(cfg: ExperimentConfig, result: ExperimentResult, out_dir: Path) -> list[Path]:
    """写出报告与表格 (不含时间戳)，返回所有数值产出文件。"""
    payload = {
        "kind": result.kind,
        "status": result.status,
        "result": result.report,
        "acceptance": result.acceptance,
        "accepted": result.accepted,
    }
    if result.error is not None:
        payload["error"] = result.error.message
    paths = [write_json(out_dir / REPORT_NAME, payload)]
    for name, (columns, data) in sorted(result.tables.items()):
        paths.append(write_table(out_dir, name, columns, data, cfg.fmt))
    return [*paths, *result.artifacts]


def write_manifest(
    cfg: ExperimentConfig,
    result: ExperimentResult,
    out_dir: Path,
    run_id: str,
    artifacts: list[Path],
) -> Path:
    """清单: 配置快照、版本、种子、状态、时间戳与产出文件摘要。"""
    entries = []
    for path in artifacts:
        digest, size = file_digest(path)
        entries.append({"name": Path(path).name, "sha256": digest, "size": size})
    manifest = {
        "run_id": run_id,
        "config": cfg.snapshot(),
        "config_hash": cfg.config_hash(),
        "source": cfg.source,
        "versions": versions(),
        "master_seed": cfg.seed,
        "seed_rule": "sha256('{master}:{index}')[:8], little-endian",
        "path_seeds": result.path_seeds,
        "status": result.status,
        "message": result.error.message if result.error else None,
        "acceptance": result.acceptance,
        "timestamp": int(time.time()),
        "artifacts": entries,
    }
    return write_json(out_dir / MANIFEST_NAME, manifest)
