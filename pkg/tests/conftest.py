import os
from pathlib import Path

import pytest

from domineering import database

# A prebuilt file can be supplied to skip the ~30 s build.
DB_ENV = "DOMINEERING_TEST_DB"


def pytest_configure(config):
    config.addinivalue_line("markers", "stretch: long-running full-scale checks (DOMINEERING_STRETCH=1)")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("DOMINEERING_STRETCH"):
        return
    skip = pytest.mark.skip(reason="stretch check; set DOMINEERING_STRETCH=1")
    for item in items:
        if "stretch" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def db_path(tmp_path_factory) -> Path:
    given = os.environ.get(DB_ENV)
    if given and Path(given).exists():
        db = database.load(given)
        if db.max_size >= 12:
            return Path(given)
    path = tmp_path_factory.mktemp("db") / "d12.dcgt"
    database.build(12, path=path)
    return path


@pytest.fixture(scope="session")
def db12(db_path):
    db = database.load(db_path)
    if db.max_size > 12:
        for n in [n for n in db.layers if n > 12]:
            del db.layers[n]
        db.max_size = 12
    return db


@pytest.fixture(scope="session")
def store(db12):
    return db12.store


@pytest.fixture(scope="session")
def census12(db12):
    return database.census(db12)


# ----------------------------------------------------------------------
# acceptance verdicts: one line per criterion, repeated in the summary

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    skipped = [
        r.nodeid for r in terminalreporter.stats.get("skipped", []) if "test_acceptance" in r.nodeid
    ]
    if not (_VERDICTS or skipped):
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in _VERDICTS:
        terminalreporter.write_line(line)
    for nodeid in skipped:
        terminalreporter.write_line(f"[SKIP] {nodeid.split('::')[-1]} (stretch)")
