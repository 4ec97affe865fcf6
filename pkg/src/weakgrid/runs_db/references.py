# -*- coding: utf-8 -*-
"""
Frozen reference values produced by high-order runs.
"""
import json
import logging
from typing import Any

from ..models import Reference
from .db import Database, utc_now

logger = logging.getLogger(__name__)


class ReferenceStore:
    def __init__(self, db: Database):
        self._db = db

    def get(self, model_id: str) -> Reference | None:
        row = self._db.row("SELECT * FROM refs WHERE model_id = ?", (model_id,))
        if not row:
            return None
        return Reference(row["value"], row["provenance"], row["ci"])

    def put(self, model_id: str, reference: Reference, settings: dict[str, Any]) -> bool:
        """Store the first reference for ``model_id``; later values never replace it."""
        query = """
            INSERT OR IGNORE INTO refs (model_id, value, ci, provenance, settings, created_at)
            VALUES (?, ?, ?, ?, ?, ?)
        """
        params = (
            model_id,
            reference.value,
            reference.ci_half_width,
            reference.provenance,
            json.dumps(settings, sort_keys=True, default=str),
            utc_now(),
        )
        success = self._db.write(query, params)
        if success:
            logger.info("[ReferenceStore] %s frozen at %.8g ± %.2g", model_id, reference.value, reference.ci_half_width)
        return success

    def __repr__(self) -> str:
        return f"ReferenceStore(db={self._db!r})"
