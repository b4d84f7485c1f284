import pytest

from clustercert import Cube, FunctionSpec, GridSpec, sample

# (number, title, passed, detail) rows printed at the end of the session
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {num}. {title}: {detail}")


def halfspace(m, high=2.0, low=0.0, dim=2, side=1.0):
    fs = FunctionSpec("indicator-halfspace", {"axis": 0, "threshold": 0.0, "low": low, "high": high})
    return sample(fs, GridSpec(Cube((0.0,) * dim, side), m))


@pytest.fixture
def unit2():
    return lambda m: GridSpec(Cube.unit(2), m)
