import pytest

ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


@pytest.fixture
def record():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
