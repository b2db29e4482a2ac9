import logging

logger = logging.getLogger("spde_lab")


def configure_logging(level: str = "INFO") -> None:
    """配置根日志处理器，并把 warnings 模块的警告转入日志。"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
    )
    logging.captureWarnings(True)
