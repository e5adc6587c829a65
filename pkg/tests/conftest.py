import numpy as np
import pytest

CRITERIA: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{name} {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA.append(line)
    print(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
