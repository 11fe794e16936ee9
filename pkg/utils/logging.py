"""Process logging: a rich console on stderr, an optional rotating file, and JSON event lines.

stdout is left to command output (summaries, tables), so piping `asymprune generate` stays clean.
"""

import logging
import logging.handlers
import os
from typing import Iterable, Optional

import orjson
from rich.console import Console
from rich.logging import RichHandler

_FILE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
_MARKER = "_configured_by_asymprune"
_NOISY = ("langgraph", "httpx", "urllib3")


def setup_logging(
    *,
    level: int | str = logging.INFO,
    log_file_path: Optional[str] = None,
    enable_console: bool = True,
    rotate_max_bytes: int = 10 * 1024 * 1024,
    rotate_backup_count: int = 5,
    quiet: Iterable[str] = _NOISY,
) -> None:
    """Configure the root logger once; later calls are no-ops."""
    root_logger = logging.getLogger()
    if getattr(root_logger, _MARKER, False):
        return

    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    root_logger.setLevel(level)

    if log_file_path:
        os.makedirs(os.path.dirname(log_file_path) or ".", exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file_path, maxBytes=rotate_max_bytes, backupCount=rotate_backup_count, encoding="utf-8",
        )
        file_handler.setFormatter(logging.Formatter(fmt=_FILE_FORMAT, datefmt=_DATE_FORMAT))
        root_logger.addHandler(file_handler)

    if enable_console:
        root_logger.addHandler(RichHandler(
            console=Console(stderr=True),
            rich_tracebacks=False,
            show_path=False,
            markup=False,
            log_time_format=_DATE_FORMAT,
        ))

    # Third-party libraries only surface warnings
    for name in quiet:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    setattr(root_logger, _MARKER, True)


def setup_from_settings() -> None:
    """Configure logging from `ASYMPRUNE_*` settings."""
    from utils.settings import settings

    setup_logging(level=settings.log_level, log_file_path=settings.log_file or None)


def log_kv(logger: logging.Logger, level: int, phase: str, **kwargs) -> None:
    """One JSON line with the phase plus key-values, e.g. `{"phase":"epoch","epoch":3,...}`."""
    if not logger.isEnabledFor(level):
        return
    payload = {"phase": phase, **kwargs}
    try:
        logger.log(level, orjson.dumps(payload, default=str, option=orjson.OPT_SERIALIZE_NUMPY).decode())
    except orjson.JSONEncodeError:
        logger.log(level, f"{phase} | {kwargs}")
