"""Unit tests for src/weakgrid/runs_db/references.py"""

import json

from src.weakgrid.models import HIGH_ORDER_RUN, Reference
from src.weakgrid.runs_db import Database, ReferenceStore


class TestReferenceStore:
    """Tests for ReferenceStore."""

    def setup_method(self):
        self.reference = Reference(0.3012, HIGH_ORDER_RUN, 4e-5)

    def test_missing(self, tmp_path):
        assert ReferenceStore(Database(tmp_path / "r.db")).get("pdmp-tcp") is None

    def test_put_and_get(self, tmp_path):
        store = ReferenceStore(Database(tmp_path / "r.db"))
        assert store.put("sde-quadratic", self.reference, {"nu": 5, "n": 5})
        assert store.get("sde-quadratic") == self.reference

    def test_first_value_is_kept(self, tmp_path):
        store = ReferenceStore(Database(tmp_path / "r.db"))
        store.put("sde-quadratic", self.reference, {})
        store.put("sde-quadratic", Reference(9.0, HIGH_ORDER_RUN, 1.0), {})
        assert store.get("sde-quadratic").value == 0.3012

    def test_settings_stored_as_json(self, tmp_path):
        db = Database(tmp_path / "r.db")
        ReferenceStore(db).put("pdmp-tcp", self.reference, {"seed": 20240101, "nu": 5})
        row = db.row("SELECT settings FROM refs WHERE model_id = ?", ("pdmp-tcp",))
        assert json.loads(row["settings"]) == {"nu": 5, "seed": 20240101}
