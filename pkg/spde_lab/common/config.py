import copy
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .types import ConfigError, CovarianceModel, ExperimentKind

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "_conf_schema.json"

_TYPE_NAMES = {
    "int": "整数",
    "float": "实数",
    "bool": "布尔值",
    "string": "字符串",
    "list": "列表",
    "object": "对象",
}


def load_schema(path: str | Path = SCHEMA_PATH) -> dict[str, Any]:
    """读取配置 schema。"""
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _type_ok(value: Any, kind: str) -> bool:
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    elif kind == "float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind == "bool":
        return isinstance(value, bool)
    elif kind == "string":
        return isinstance(value, str)
    elif kind == "list":
        return isinstance(value, list)
    elif kind == "object":
        return isinstance(value, dict)
    return False


def _fill(raw: dict[str, Any], items: dict[str, Any], prefix: str) -> dict[str, Any]:
    """按 schema 校验一个对象并补全默认值。"""
    unknown = sorted(set(raw) - set(items))
    if unknown:
        raise ConfigError(f"未知配置项: {', '.join(f'{prefix}{key}' for key in unknown)}")
    out: dict[str, Any] = {}
    for key, spec in items.items():
        dotted = f"{prefix}{key}"
        kind = spec["type"]
        if kind == "object":
            value = raw.get(key, {})
            if not _type_ok(value, "object"):
                raise ConfigError(f"配置项 {dotted} 必须为对象")
            out[key] = _fill(value, spec["items"], f"{dotted}.")
            continue
        if key not in raw:
            out[key] = copy.deepcopy(spec.get("default"))
            continue
        value = raw[key]
        if not _type_ok(value, kind):
            raise ConfigError(
                f"配置项 {dotted} 必须为{_TYPE_NAMES.get(kind, kind)} (当前为 {value!r})"
            )
        if "options" in spec and value not in spec["options"]:
            message = f"配置项 {dotted} 的取值 {value!r} 不在 {spec['options']} 之中"
            if "hint" in spec:
                message += f" ({spec['hint']})"
            raise ConfigError(message)
        out[key] = float(value) if kind == "float" else value
    return out


def validate_document(document: Any, schema: dict[str, Any] | None = None) -> dict[str, Any]:
    """
    严格校验配置文档并补全默认值。

    Raises:
        ConfigError: 未知的节或键、类型错误、取值不在 options 中。
    """
    if not isinstance(document, dict):
        raise ConfigError("配置文件顶层必须为对象")
    schema = schema or load_schema()
    return _fill(document, schema, "")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    经过校验的实验配置。

    Args:
        kind (ExperimentKind): 实验类型。
        paths (int): 路径数。
        seed (int): 主种子。
        threads (int): 工作线程数。
        output_dir (Path): 输出目录。
        fmt (str): 表格结果格式。
        p_values (tuple[float, ...]): 矩的阶数。
        tier (str): 验收容差档位。
        sections (dict[str, Any]): 补全默认值后的完整配置。
        source (str | None): 配置文件路径。
    """

    kind: ExperimentKind
    paths: int
    seed: int
    threads: int
    output_dir: Path
    fmt: str
    p_values: tuple[float, ...]
    tier: str
    sections: dict[str, Any] = field(default_factory=dict, compare=False)
    source: str | None = None

    def section(self, name: str) -> dict[str, Any]:
        return self.sections[name]

    @property
    def workers(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def with_overrides(
        self,
        kind: str | None = None,
        seed: int | None = None,
        paths: int | None = None,
        threads: int | None = None,
        output_dir: str | Path | None = None,
        fmt: str | None = None,
    ) -> "ExperimentConfig":
        """命令行参数覆盖配置值，并同步到 sections 快照。"""
        sections = copy.deepcopy(self.sections)
        experiment = sections["experiment"]
        changes: dict[str, Any] = {}
        if kind is not None:
            try:
                changes["kind"] = ExperimentKind(kind)
            except ValueError:
                raise ConfigError(f"未知的实验类型: {kind}")
            experiment["kind"] = kind
        if seed is not None:
            changes["seed"] = experiment["seed"] = _check_seed(seed)
        if paths is not None:
            changes["paths"] = experiment["paths"] = _check_positive(paths, "experiment.paths")
        if threads is not None:
            if threads < 0:
                raise ConfigError(f"线程数不能为负 (threads={threads})")
            changes["threads"] = experiment["threads"] = threads
        if output_dir is not None:
            experiment["output_dir"] = str(output_dir)
            changes["output_dir"] = Path(output_dir)
        if fmt is not None:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"未知的输出格式: {fmt}")
            changes["fmt"] = experiment["format"] = fmt
        return dataclasses.replace(self, sections=sections, **changes)

    def snapshot(self) -> dict[str, Any]:
        """可写入清单的配置快照 (不含线程数与输出目录，它们不影响数值结果)。"""
        out = copy.deepcopy(self.sections)
        out["experiment"].pop("threads", None)
        out["experiment"].pop("output_dir", None)
        return out

    def config_hash(self) -> str:
        payload = json.dumps(self.snapshot(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 1 << 64:
        raise ConfigError(f"主种子必须为 64 位无符号整数 (seed={seed})")
    return seed


def _check_positive(value: int, dotted: str) -> int:
    if value < 1:
        raise ConfigError(f"配置项 {dotted} 必须为正整数 (当前为 {value})")
    return value


def covariance_from_section(section: dict[str, Any]) -> CovarianceModel:
    """由 covariance 节构造协方差模型，参数定义域错误原样抛出。"""
    kind = section["kind"]
    k = section["k"]
    if kind == "white":
        return CovarianceModel.white(k)
    elif kind == "riesz":
        return CovarianceModel.riesz(section["beta"], k)
    elif kind == "bessel":
        return CovarianceModel.bessel(section["alpha"], k)
    elif kind == "fractional":
        hurst = section["hurst"]
        if len(hurst) != k:
            raise ConfigError(f"covariance.hurst 的长度 {len(hurst)} 必须等于 k={k}")
        return CovarianceModel.fractional(hurst)
    raise ConfigError(f"未知的协方差族: {kind}")


def parse_config(document: Any, source: str | None = None) -> ExperimentConfig:
    """校验文档并组装 ExperimentConfig。"""
    sections = validate_document(document)
    experiment = sections["experiment"]
    p_values = experiment["p"]
    if not p_values or any(not _type_ok(p, "float") or p < 2 for p in p_values):
        raise ConfigError(f"experiment.p 必须为不小于 2 的实数列表 (当前为 {p_values})")
    if experiment["threads"] < 0:
        raise ConfigError("experiment.threads 不能为负")
    return ExperimentConfig(
        kind=ExperimentKind(experiment["kind"]),
        paths=_check_positive(experiment["paths"], "experiment.paths"),
        seed=_check_seed(experiment["seed"]),
        threads=experiment["threads"],
        output_dir=Path(experiment["output_dir"]),
        fmt=experiment["format"],
        p_values=tuple(float(p) for p in p_values),
        tier=experiment["tier"],
        sections=sections,
        source=source,
    )


def read_config(path: str | Path) -> ExperimentConfig:
    """
    读取并校验 JSON 配置文件 (只做 schema 层面的检查)。

    Raises:
        ConfigError: 文件不存在、JSON 语法错误 (附行列号) 或 schema 校验失败。
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e!s}")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件 {path} 解析失败 (第 {e.lineno} 行, 第 {e.colno} 列): {e.msg}")
    return parse_config(document, str(path))
