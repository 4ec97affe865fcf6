# -*- coding: utf-8 -*-
"""
Pytest configuration for the tests directory.
"""
import logging
import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def set_database_path_and_clear_cache(tmp_path_factory):
    """Point WEAKGRID_DB_PATH at a temporary file and clear cached settings/loaders."""
    db_file = tmp_path_factory.mktemp("db") / "test.db"
    os.environ["WEAKGRID_DB_PATH"] = str(db_file)

    from src.weakgrid import config, loader

    config.get_settings.cache_clear()
    loader.load_database.cache_clear()
    loader.load_run_ledger.cache_clear()
    loader.load_reference_store.cache_clear()


@pytest.fixture(autouse=True)
def detach_cli_handlers():
    """The CLI binds a handler to the stderr of the test that ran it; drop it afterwards."""
    yield
    project_logger = logging.getLogger("src.weakgrid")
    for handler in list(project_logger.handlers):
        project_logger.removeHandler(handler)
    project_logger.propagate = True
    project_logger.setLevel(logging.NOTSET)


@pytest.fixture
def logistic():
    from src.weakgrid.kernels import build_kernel
    from src.weakgrid.models import ode_logistic

    return build_kernel("euler", ode_logistic().spec)


@pytest.fixture
def linear():
    from src.weakgrid.kernels import build_kernel
    from src.weakgrid.models import linear_ode

    return build_kernel("euler", linear_ode().spec)


@pytest.fixture
def quadratic_sde():
    from src.weakgrid.kernels import build_kernel
    from src.weakgrid.models import sde_quadratic

    return build_kernel("euler", sde_quadratic().spec)


@pytest.fixture
def tcp():
    from src.weakgrid.kernels import build_kernel
    from src.weakgrid.models import pdmp_tcp

    return build_kernel("pdmp", pdmp_tcp().spec)


@pytest.fixture
def ledger_factory():
    """Factory fixture building a RunLedger on a fresh database file.

    Usage:
        def test_something(ledger_factory, tmp_path):
            ledger = ledger_factory(tmp_path / "runs.db")
    """
    from src.weakgrid.runs_db import Database, RunLedger

    def _create_ledger(db_file):
        db = Database(db_file)
        db.init_tables()
        return RunLedger(db=db)

    return _create_ledger


@pytest.fixture
def desk_reference(monkeypatch, tmp_path):
    """Reference of a builtin model, frozen nu=5, n=5 runs produced at a desk-scale half-width.

    Each test gets its own database file, so references frozen here never leak into other tests.

    Usage:
        def test_something(desk_reference):
            reference = desk_reference(sde_quadratic(), eps=1e-4)
    """
    from src.weakgrid import config, loader

    def _clear():
        config.get_settings.cache_clear()
        loader.load_database.cache_clear()
        loader.load_run_ledger.cache_clear()
        loader.load_reference_store.cache_clear()

    def _reference(model, eps=1e-3):
        monkeypatch.setenv("WEAKGRID_DB_PATH", str(tmp_path / "refs.db"))
        monkeypatch.setenv("WEAKGRID_REFERENCE_EPS", str(eps))
        monkeypatch.setenv("WEAKGRID_REFERENCE_PILOT", "500")
        _clear()
        return loader.load_reference(model)

    yield _reference
    _clear()
