from __future__ import annotations

import pytest


class FakeClock:
    """Deterministic clock: every call advances by a fixed step."""

    def __init__(self, start: float = 1_700_000_000.0, step: float = 1.0) -> None:
        self.now = start
        self.step = step

    def __call__(self) -> float:
        value = self.now
        self.now += self.step
        return value


@pytest.fixture
def fake_clock() -> FakeClock:
    return FakeClock()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for status, flag in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], flag))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, flag in sorted(rows):
            terminalreporter.write_line(f"{flag}  {name}")
