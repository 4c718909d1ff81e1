import pytest

from structmor.bench import run_benchmark

_CRITERIA: list[str] = []


@pytest.fixture(scope="session")
def bench_report():
    """The default two-beam benchmark, shared by every test that reads it."""
    return run_benchmark()


@pytest.fixture
def criterion(capsys):
    """Record one acceptance line: ``criterion(name, ok, detail)``."""
    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _CRITERIA.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
