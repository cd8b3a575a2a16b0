"""Console logging for the ``hyperjac`` logger tree."""

import logging

from rich.console import Console
from rich.logging import RichHandler

from .config import get_settings

_CONFIGURED = False

# stdout is reserved for results
stderr_console = Console(stderr=True)


def setup_logging(level: str = None) -> logging.Logger:
    """Attach a single RichHandler to the ``hyperjac`` logger.

    Args:
        level: logging level name; defaults to ``Settings.log_level``.

    Returns:
        the package logger
    """
    global _CONFIGURED
    logger = logging.getLogger("hyperjac")
    logger.setLevel((level or get_settings().log_level).upper())
    if not _CONFIGURED:
        handler = RichHandler(console=stderr_console, show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
        logger.propagate = False
        _CONFIGURED = True
    return logger
