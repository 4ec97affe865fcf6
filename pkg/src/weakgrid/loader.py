# -*- coding: utf-8 -*-
import functools
import logging

from .config import get_settings
from .estimator import EstimateMode, estimate
from .kernels import build_kernel
from .models import HIGH_ORDER_RUN, REFERENCE_N, REFERENCE_NU, REFERENCE_SEED, BuiltinModel, Reference
from .runs_db import Database, ReferenceStore, RunLedger

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=1)
def load_database() -> Database:
    _db = Database(get_settings().db_path)
    _db.init_tables()
    return _db


@functools.lru_cache(maxsize=1)
def load_run_ledger() -> RunLedger:
    return RunLedger(db=load_database())


@functools.lru_cache(maxsize=1)
def load_reference_store() -> ReferenceStore:
    return ReferenceStore(db=load_database())


def known_reference(model: BuiltinModel) -> Reference | None:
    """Closed-form or already frozen reference; never starts a production run."""
    if model.reference is not None:
        return model.reference
    return load_reference_store().get(model.id)


def load_reference(model: BuiltinModel) -> Reference:
    """Closed-form reference, else the frozen one, else produce and freeze it."""
    if model.reference is not None:
        return model.reference

    store = load_reference_store()
    frozen = store.get(model.id)
    if frozen is not None:
        return frozen

    settings = get_settings()
    logger.warning(
        "No frozen reference for %s: running nu=%d, n=%d to half-width %g per term (this takes a while)",
        model.id,
        REFERENCE_NU,
        REFERENCE_N,
        settings.reference_eps,
    )
    kernel = build_kernel(None, model.spec)
    report = estimate(
        kernel,
        REFERENCE_NU,
        REFERENCE_N,
        EstimateMode(epsilon=settings.reference_eps),
        seed=REFERENCE_SEED,
        pilot_size=settings.reference_pilot,
        workers=settings.workers,
        chunk_size=settings.chunk_size,
    )
    reference = Reference(report.value, HIGH_ORDER_RUN, report.ci_half_width)
    store.put(
        model.id,
        reference,
        {
            "nu": REFERENCE_NU,
            "n": REFERENCE_N,
            "kernel": kernel.name,
            "epsilon": settings.reference_eps,
            "pilot": settings.reference_pilot,
            "seed": REFERENCE_SEED,
        },
    )
    return reference
