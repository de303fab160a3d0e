import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from src.config import settings

# Library modules stay silent until an entry point configures sinks
PACKAGE = "src"
logger.disable(PACKAGE)

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)


def setup_logging(level: Optional[str] = None, log_file: Optional[Path] = None) -> None:
    """Configure loguru sinks for library and CLI use.

    Args:
        level: Minimum level; defaults to ``settings.log_level``
        log_file: Optional rotating file sink; defaults to ``settings.log_file``
    """
    logger.remove()
    logger.enable(PACKAGE)

    level = level or settings.log_level
    log_file = log_file or settings.log_file

    logger.add(
        sys.stderr,
        format=LOG_FORMAT,
        level=level,
        colorize=True,
    )

    if log_file is not None:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path,
            format=LOG_FORMAT,
            level=level,
            rotation="10 MB",
            retention="7 days",
            compression="zip",
        )


def get_logger(name: str):
    """Get a logger instance with the given name."""
    return logger.bind(name=name)
