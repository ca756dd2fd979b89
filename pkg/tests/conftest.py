import csv
from pathlib import Path

import pytest

from mendelfisher import load_embedded

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def ds():
    return load_embedded()


@pytest.fixture(scope="session")
def experiment_reference():
    with open(DATA / "experiment_reference.csv", newline="") as f:
        return {int(r["id"]): r for r in csv.DictReader(f)}


# acceptance verdicts, printed once at the end of the run
_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    def record(number: int, passed: bool, detail: str) -> None:
        _VERDICTS[number] = (passed, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        passed, detail = _VERDICTS[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
