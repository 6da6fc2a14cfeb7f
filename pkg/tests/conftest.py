import pytest

from macopp import instances

ACCEPTANCE_LINES: list[str] = []


def record(number: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def usar():
    return instances.get("usar").load()


@pytest.fixture(scope="session")
def usar_micro():
    return instances.get("usar-micro").load()
