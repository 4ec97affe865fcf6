# -*- coding: utf-8 -*-

from .db import Database
from .ledger import RunLedger
from .references import ReferenceStore

__all__ = [
    "Database",
    "ReferenceStore",
    "RunLedger",
]
