"""Build-mode aware collection and the acceptance summary.

Test naming decides which builds a test runs in:

* names ending in ``_LL`` use 64-bit maps and need the 64-bit API,
* ``@pytest.mark.dual`` tests need both widths,
* ``@pytest.mark.width_agnostic`` tests run in every build,
* everything else is a legacy 32-bit test.
"""
import pytest

from widemap import config as build

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "dual: needs both global index widths built")
    config.addinivalue_line("markers", "width_agnostic: runs in every build mode")
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def _needs(item):
    if item.get_closest_marker("width_agnostic"):
        return set()
    if item.get_closest_marker("dual"):
        return {32, 64}
    name = item.name.split("[", 1)[0]
    return {64} if name.endswith("_LL") else {32}


def pytest_collection_modifyitems(config, items):
    built = {w for w, ok in ((32, build.HAVE_32BIT), (64, build.HAVE_64BIT)) if ok}
    for item in items:
        missing = _needs(item) - built
        if missing:
            item.add_marker(pytest.mark.skip(
                reason=f"{build.build_mode()}-build: {sorted(missing)}-bit API excluded"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}")
