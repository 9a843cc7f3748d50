"""Shared fixtures.

The `criterion` fixture collects named pass/fail verdicts from the
acceptance tests; `pytest_terminal_summary` replays them as one line per
criterion at the end of the run so the gate's outcome is readable without
scrolling through tracebacks.
"""

import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a named acceptance verdict; returns the boolean unchanged."""

    def record(name: str, ok: bool, detail: str) -> bool:
        _CRITERIA.append((name, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        )
