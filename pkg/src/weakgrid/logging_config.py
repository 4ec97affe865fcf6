"""
Colored logging for the weakgrid namespace.

Diagnostics go to stderr so that stdout carries only command output.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import colorlog

CONSOLE_FORMAT = "%(filename)s:%(lineno)s %(funcName)s() - %(log_color)s%(levelname)-s %(reset)s%(message)s"
FILE_FORMAT = "%(asctime)s %(name)s %(levelname)-8s %(message)s"

LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}


def resolve_level(level: str | int) -> int:
    """Numeric level for a name such as ``"debug"``; unknown names mean INFO."""
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def _file_handler(path: Path, level: int) -> logging.Handler:
    handler = logging.FileHandler(path, mode="a", encoding="utf-8")
    handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    handler.setLevel(level)
    return handler


def _log_path(log_file: str) -> Path | None:
    path = Path(os.path.expandvars(log_file)).expanduser()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"weakgrid: cannot create log directory {path.parent}: {e}", file=sys.stderr)
        return None
    return path


def setup_logging(
    level: str | int = "WARNING",
    name: str = "weakgrid",
    log_file: str | None = None,
) -> None:
    """
    Configure the ``name`` logger and leave the root logger alone.

    The first call wins; later calls return as soon as handlers exist. With
    ``log_file`` set, everything at ``level`` goes to that file and warnings
    are also copied to a ``.err`` file next to it.
    """
    project_logger = logging.getLogger(name)
    if project_logger.handlers:
        return

    numeric_level = resolve_level(level)
    project_logger.setLevel(numeric_level)
    project_logger.propagate = False

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(colorlog.ColoredFormatter(CONSOLE_FORMAT, log_colors=LOG_COLORS))
    console.setLevel(numeric_level)
    project_logger.addHandler(console)

    path = _log_path(log_file) if log_file else None
    if path is not None:
        project_logger.addHandler(_file_handler(path, numeric_level))
        project_logger.addHandler(_file_handler(path.with_suffix(".err"), logging.WARNING))
