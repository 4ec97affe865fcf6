# -*- coding: utf-8 -*-
"""
SQLite storage for the run ledger and frozen reference values.

Every call opens and closes its own connection.
"""
import logging
import sqlite3
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any

logger = logging.getLogger(__name__)

SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    id          INTEGER  PRIMARY KEY AUTOINCREMENT,
    command     TEXT     NOT NULL,
    config      TEXT     NOT NULL,
    status      TEXT     NOT NULL,
    value       REAL,
    ci          REAL,
    elapsed     REAL,
    run_count   INTEGER  DEFAULT 1,
    timestamp   DATETIME DEFAULT CURRENT_TIMESTAMP,
    date_only   DATE     DEFAULT (DATE('now')),
    UNIQUE(command, config, status, date_only)
);
CREATE TABLE IF NOT EXISTS refs (
    model_id    TEXT     PRIMARY KEY,
    value       REAL     NOT NULL,
    ci          REAL     NOT NULL,
    provenance  TEXT     NOT NULL,
    settings    TEXT     NOT NULL,
    created_at  TEXT     NOT NULL
);
"""

Params = Sequence[Any]


def _missing_table(error: sqlite3.Error) -> bool:
    return isinstance(error, sqlite3.OperationalError) and "no such table" in str(error)


class Database:
    def __init__(self, db_path: str):
        self.db_path = str(db_path)

    @contextmanager
    def connection(self) -> Iterator[sqlite3.Connection]:
        """Connection with dict-like rows; commits on success, rolls back on error."""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        try:
            with conn:
                yield conn
        finally:
            conn.close()

    def init_tables(self) -> None:
        with self.connection() as conn:
            conn.executescript(SCHEMA)
        logger.debug("[Database] schema ready at %s", self.db_path)

    def write(self, query: str, params: Params = ()) -> bool:
        """
        Run one INSERT/UPDATE statement.

        A missing table triggers ``init_tables`` and a single retry. Any other
        SQLite failure is logged and reported as ``False``.
        """
        for attempt in range(2):
            try:
                with self.connection() as conn:
                    conn.execute(query, params)
                return True
            except sqlite3.Error as e:
                if attempt == 0 and _missing_table(e):
                    self.init_tables()
                    continue
                logger.error("[Database] write failed: %s", e)
                return False
        return False

    def rows(self, query: str, params: Params = ()) -> list[dict[str, Any]]:
        """SELECT as plain dicts; an uninitialised database reads as empty."""
        try:
            with self.connection() as conn:
                return [dict(r) for r in conn.execute(query, params).fetchall()]
        except sqlite3.Error as e:
            if _missing_table(e):
                self.init_tables()
                return []
            logger.error("[Database] read failed: %s", e)
            raise

    def row(self, query: str, params: Params = ()) -> dict[str, Any] | None:
        found = self.rows(query, params)
        return found[0] if found else None

    def __repr__(self) -> str:
        return f"Database(path={self.db_path!r})"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


__all__ = [
    "SCHEMA",
    "Database",
    "utc_now",
]
