import pytest

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        marker = getattr(report, "_acceptance", None)
        if marker is not None:
            _acceptance.append((marker, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    # a parametrized criterion passes only if every case passed
    merged = {}
    for (number, title), outcome in _acceptance:
        merged.setdefault((number, title), []).append(outcome == "passed")
    terminalreporter.section("acceptance criteria")
    for (number, title), results in sorted(merged.items()):
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
