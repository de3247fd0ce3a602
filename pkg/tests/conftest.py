import pytest

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        number, title = mark.args
        status = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        detail = getattr(item, "criterion_detail", "")
        _RESULTS.append((number, title, status, detail))


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the current criterion."""
    def put(text):
        request.node.criterion_detail = text
    return put


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_RESULTS):
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
