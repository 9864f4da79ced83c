import pytest

# filled by tests/test_acceptance.py: (criterion number, title, passed, seconds, note)
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, float, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, seconds, note in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"{status} criterion {number}: {title} ({seconds:.2f}s)"
        terminalreporter.write_line(line + (f" - {note}" if note else ""))


@pytest.fixture
def acceptance_results():
    return ACCEPTANCE_RESULTS
