import logging

from rich.console import Console
from rich.logging import RichHandler

from .config_loader import ConfigManager


def setup_logging(level: str = None) -> logging.Logger:
    """
    Configure the logging system based on settings in the configuration file.

    Args:
        level: Optional level overriding the configured one (e.g. from --verbose)

    Returns:
        A configured logger instance
    """
    log_config = ConfigManager.get_config("logging")
    level = level or log_config.get("level", "INFO")

    handlers = None
    fmt = log_config.get("format", "%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    if log_config.get("rich", True):
        handlers = [RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)]
        fmt = "%(name)s: %(message)s"

    logging.basicConfig(
        level=getattr(logging, level),
        format=fmt,
        datefmt=log_config.get("date_format", "%Y-%m-%d %H:%M:%S"),
        handlers=handlers,
        force=True,
    )

    return logging.getLogger("next")
