import argparse
import asyncio
import sys
from pathlib import Path

from .common import (  # type: ignore
    ConfigError,
    ExperimentConfig,
    LabError,
    RunStatus,
    configure_logging,
    logger,
    parse_config,
    read_config,
)
from .components import ExperimentComponents, build_components  # type: ignore
from .db import RunLedger  # type: ignore
from .experiment_flow import ExperimentFlow, ExperimentResult  # type: ignore
from .report import write_manifest, write_results  # type: ignore

SUBCOMMANDS = ("check", "solve", "picard", "factorize", "regularity", "noise")
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4
LEDGER_NAME = "runs.db"


class SPDELab:
    """一次命令行运行: 组件构造、运行台账与实验流程的生命周期。"""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.components: ExperimentComponents | None = None
        self.ledger = RunLedger(cfg.output_dir / LEDGER_NAME)
        self.run_id: str | None = None
        self.run_dir: Path | None = None

    async def initialize(self) -> None:
        logger.debug("初始化实验组件")
        # 组件不变量先于台账检查，配置错误不留下运行记录
        self.components = build_components(self.cfg)
        self.cfg.output_dir.mkdir(parents=True, exist_ok=True)
        self.ledger.initialize()

    async def run(self) -> ExperimentResult:
        if self.components is None:
            raise RuntimeError("SPDELab 尚未初始化")
        cfg = self.cfg
        self.run_id = self.ledger.add_run(cfg.kind, cfg.config_hash(), cfg.seed)
        self.run_dir = cfg.output_dir / f"{cfg.kind.value}-{self.run_id[:8]}"
        self.run_dir.mkdir(parents=True, exist_ok=True)
        logger.info(
            f"开始 {cfg.kind.value} 实验 (运行 {self.run_id}, 主种子 {cfg.seed}, "
            f"{cfg.paths} 条路径, {cfg.workers} 个线程)"
        )

        async with ExperimentFlow(self.components, self.run_dir) as flow:
            result = await flow.run()

        try:
            artifacts = write_results(cfg, result, self.run_dir)
            manifest = write_manifest(cfg, result, self.run_dir, self.run_id, artifacts)
            self.ledger.add_path_seeds(self.run_id, result.path_seeds)
            for path in [*artifacts, manifest]:
                self.ledger.add_artifact(self.run_id, path)
        except (OSError, LabError) as e:
            logger.error(f"写出结果失败: {e!s}")
            self.ledger.finish_run(self.run_id, RunStatus.Failed, f"写出结果失败: {e!s}")
            raise
        message = result.error.message if result.error else None
        self.ledger.finish_run(self.run_id, result.status, message)
        logger.info(f"结果已写入 {self.run_dir} (状态 {result.status.value})")
        return result

    async def terminate(self) -> None:
        self.ledger.close()


def exit_code(result: ExperimentResult) -> int:
    if result.error is not None:
        return result.error.exit_code
    if not result.accepted:
        failed = [name for name, ok in result.acceptance.items() if not ok]
        logger.warning(f"验收判据未通过: {', '.join(failed)}")
        return EXIT_ACCEPTANCE
    return EXIT_OK


async def _run(cfg: ExperimentConfig) -> int:
    lab = SPDELab(cfg)
    try:
        await lab.initialize()
        result = await lab.run()
    finally:
        await lab.terminate()
    return exit_code(result)


def run_experiment(cfg: ExperimentConfig) -> int:
    """
    执行实验并写出清单与结果文件。

    Returns:
        int: 退出码，0 成功，2 配置错误，3 数值失败，4 验收未通过。
    """
    try:
        return asyncio.run(_run(cfg))
    except LabError as e:
        logger.error(f"{cfg.kind.value} 实验中止: {e!s}")
        return e.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON 配置文件，缺省时全部取默认值")
    common.add_argument("--seed", type=int, help="主种子 (64 位无符号整数)")
    common.add_argument("--paths", type=int, help="蒙特卡罗路径数")
    common.add_argument("--threads", type=int, help="工作线程数，0 表示全部核心")
    common.add_argument("--out", type=Path, help="输出目录")
    common.add_argument("--format", choices=["csv", "json"], help="表格结果格式")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="日志级别",
    )

    parser = argparse.ArgumentParser(
        prog="spde_lab", description="带空间齐次高斯噪声的抛物型 SPDE 数值实验"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check": "积分条件判定与基本解结构检查",
        "solve": "指数 Euler 求解与矩估计",
        "picard": "Picard 迭代收缩性",
        "factorize": "因子分解方法往返误差",
        "regularity": "Hölder 指数估计",
        "noise": "噪声保真度与等距性检验",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def load_cli_config(args: argparse.Namespace) -> ExperimentConfig:
    """读取配置并应用命令行覆盖，子命令决定实验类型。"""
    cfg = read_config(args.config) if args.config else parse_config({})
    if args.config and cfg.kind.value != args.command:
        logger.warning(f"配置中的实验类型 {cfg.kind.value} 被子命令 {args.command} 覆盖")
    return cfg.with_overrides(
        kind=args.command,
        seed=args.seed,
        paths=args.paths,
        threads=args.threads,
        output_dir=args.out,
        fmt=args.format,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = load_cli_config(args)
    except ConfigError as e:
        logger.error(f"配置错误: {e!s}")
        return EXIT_CONFIG
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
