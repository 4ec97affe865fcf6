# -*- coding: utf-8 -*-
"""
Ledger of CLI runs, one row per distinct configuration and day.
"""
import json
import logging
from typing import Any

from .db import Database

logger = logging.getLogger(__name__)


class RunLedger:
    """
    Records every command run; identical runs on the same day share one row
    and bump its counter.
    """

    def __init__(self, db: Database):
        self._db = db

    @staticmethod
    def _config_key(config: dict[str, Any] | str) -> str:
        if isinstance(config, str):
            return config
        return json.dumps(config, sort_keys=True, default=str)

    def log_run(
        self,
        command: str,
        config: dict[str, Any] | str,
        status: str,
        value: float | None = None,
        ci: float | None = None,
        elapsed: float | None = None,
    ) -> bool:
        query = """
            INSERT INTO runs (command, config, status, value, ci, elapsed, date_only)
            VALUES (?, ?, ?, ?, ?, ?, DATE('now'))
            ON CONFLICT(command, config, status, date_only) DO UPDATE SET
                run_count = run_count + 1,
                value     = excluded.value,
                ci        = excluded.ci,
                elapsed   = excluded.elapsed,
                timestamp = CURRENT_TIMESTAMP
        """
        elapsed = round(elapsed, 3) if elapsed is not None else None
        params = (command, self._config_key(config), status, value, ci, elapsed)
        if not self._db.write(query, params):
            logger.error("[RunLedger] could not record %s run", command)
            return False
        return True

    def recent(self, limit: int = 20, command: str = "") -> list[dict]:
        """Most recent rows first, optionally for one command."""
        query = "SELECT * FROM runs"
        params: list = []
        if command:
            query += " WHERE command = ?"
            params.append(command)
        query += " ORDER BY timestamp DESC, id DESC LIMIT ?"
        params.append(max(1, int(limit)))
        return self._db.rows(query, params)

    def __repr__(self) -> str:
        return f"RunLedger(db={self._db!r})"
