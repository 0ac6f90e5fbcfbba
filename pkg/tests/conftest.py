import pytest

from fsis.dsl import parse_generator

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    number, title = marks
    ok = report.passed and _CRITERIA.get(number, (title, True))[1]
    _CRITERIA[number] = (title, ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")


def chi(name, lo, hi, expr="1"):
    return parse_generator({"name": name, "pieces": [{"support": [lo, hi], "expr": expr}]})


def pieces(name, *specs):
    return parse_generator({"name": name, "pieces": [
        {"support": [lo, hi], "expr": expr} for lo, hi, expr in specs]})


@pytest.fixture
def example6():
    """Generators of the two-subspace example with a non-closed sum."""
    return {
        "phi0": chi("phi0", "0", "1"),
        "phi1": pieces("phi1", ("0", "1", "cos(2*pi*w)"), ("1", "2", "sin(2*pi*w)")),
        "phi2": chi("phi2", "2", "3"),
        "phi3": chi("phi3", "3", "4"),
        "phi4": chi("phi4", "5/2", "7/2"),
        "phi5": pieces("phi5", ("2", "5/2", "1"), ("7/2", "4", "1")),
        "psi": chi("psi", "0", "4"),
    }
