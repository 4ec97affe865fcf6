"""Application configuration helpers."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    """Read a positive integer from the environment, falling back to `default`."""
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring malformed %s=%r, using %s", name, raw, default)
        return default
    if value < minimum:
        logger.warning("Ignoring %s=%s below %s, using %s", name, value, minimum, default)
        return default
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        logger.warning("Ignoring malformed %s=%r, using %s", name, raw, default)
        return default
    if not value > 0:
        logger.warning("Ignoring non-positive %s=%s, using %s", name, value, default)
        return default
    return value


@dataclass(frozen=True)
class Settings:
    db_path: str
    pilot_size: int = 1000  # samples per term before allocation
    workers: int = 1
    chunk_size: int = 256  # samples per work unit
    reference_eps: float = 5e-5  # target CI half-width for self-produced references
    reference_pilot: int = 1000
    log_level: str = "INFO"
    log_file: str | None = None


def _get_paths() -> str:
    # Ledger path configurable via WEAKGRID_DB_PATH, defaults to ~/weakgrid.db
    db_path_str = os.getenv("WEAKGRID_DB_PATH", "")
    if db_path_str:
        db_path = Path(os.path.expandvars(db_path_str))
    else:
        db_path = Path("~") / "weakgrid.db"

    db_path = db_path.expanduser()
    db_path.parent.mkdir(parents=True, exist_ok=True)

    return str(db_path)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings(
        db_path=_get_paths(),
        pilot_size=_env_int("WEAKGRID_PILOT", 1000, minimum=2),
        workers=_env_int("WEAKGRID_WORKERS", 1),
        chunk_size=_env_int("WEAKGRID_CHUNK", 256),
        reference_eps=_env_float("WEAKGRID_REFERENCE_EPS", 5e-5),
        reference_pilot=_env_int("WEAKGRID_REFERENCE_PILOT", 1000, minimum=2),
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        log_file=os.getenv("WEAKGRID_LOG_FILE") or None,
    )
