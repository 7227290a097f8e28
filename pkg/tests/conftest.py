"""Shared pytest wiring.

Collects the outcome of every test in test_acceptance.py and prints one
pass/fail line per criterion in the terminal summary.
"""

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results.items():
        terminalreporter.write_line(f"{name}: {outcome.upper()}")
