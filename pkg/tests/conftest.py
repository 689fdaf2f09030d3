import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        VERDICTS.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
