import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    label, text = marker.args
    ok = report.passed if report.when == "call" else False
    prev = _RESULTS.get(label, (True, text))[0]
    _RESULTS[label] = (prev and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: (int("".join(c for c in s if c.isdigit())), s)):
        ok, text = _RESULTS[label]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {text}")
