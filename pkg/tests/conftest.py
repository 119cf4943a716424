import pytest

# criterion number -> (passed, detail); filled by the acceptance suite
CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(number: str, passed: bool, detail: str = "") -> bool:
        CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
