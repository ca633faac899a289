import pytest

# acceptance results, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE: dict = {}


@pytest.fixture
def report_criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
