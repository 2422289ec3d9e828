"""Shared test configuration.

Collects the acceptance-criteria verdict lines and replays them in the
terminal summary, so a plain `pytest -v` run ends with one pass/fail line
per criterion regardless of output capturing.
"""

from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

_ACCEPTANCE_LINES: list[str] = []


def record_verdict(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)
