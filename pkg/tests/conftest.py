import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

# acceptance results, echoed in the terminal summary
_CRITERIA: list[str] = []


@pytest.fixture
def report():
    def _report(number, name, ok, detail=""):
        line = f"criterion {number:<3} {'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        _CRITERIA.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
