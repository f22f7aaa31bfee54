from pathlib import Path

import pytest

from cindex_audit.survdata import CsvSchema, load_csv

DATA = Path(__file__).parent / "data"
RATS = DATA / "rats.csv"


@pytest.fixture(scope="session")
def rats_path():
    if not RATS.exists():
        pytest.skip(f"rats fixture missing at {RATS}; see tests/data/README.md")
    return RATS


@pytest.fixture(scope="session")
def rats(rats_path):
    return load_csv(rats_path)


@pytest.fixture(scope="session")
def rats_nolitter(rats_path):
    return load_csv(rats_path, CsvSchema(drop_cols=("litter",)))


# one summary line per acceptance criterion, with the measured values
_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if not item.module.__name__.endswith("test_acceptance"):
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _ACCEPTANCE.append((status, doc, getattr(item, "ac_detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for status, doc, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status} {doc}" + (f" [{detail}]" if detail else ""))
