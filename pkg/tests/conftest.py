import numpy as np
import pytest

from otto_lab.grid import build_grid


@pytest.fixture(scope="session")
def circle64():
    return build_grid("circle", 64)


@pytest.fixture(scope="session")
def circle256():
    return build_grid("circle", 256)


@pytest.fixture(scope="session")
def torus32():
    return build_grid("torus2d", 32)


@pytest.fixture(scope="session")
def ou128():
    return build_grid("ou_line", 128, radius=6.0)


@pytest.fixture(scope="session")
def ou256():
    return build_grid("ou_line", 256, radius=6.0)


@pytest.fixture(autouse=True)
def _isolated_output(tmp_path, monkeypatch):
    """Keep every run artifact inside the test's temporary directory."""
    monkeypatch.delenv("OTTO_LAB_OUT", raising=False)
    monkeypatch.chdir(tmp_path)


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per numbered criterion

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    number, title = marker
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "passed": True, "failed": []})
    if report.failed or (report.when == "call" and report.skipped):
        entry["passed"] = False
        entry["failed"].append(report.nodeid.split("::")[-1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        status = "PASS" if entry["passed"] else "FAIL"
        line = f"AC{number:<2} {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
