import numpy as np
import pytest

from hdustat.kernels import KernelSpec

ALL_SPECS = [
    KernelSpec("gmd"),
    KernelSpec("cdp"),
    KernelSpec("skt"),
    KernelSpec("huber", xi=0.7),
    KernelSpec("product"),
]


@pytest.fixture(params=ALL_SPECS, ids=lambda s: s.family.value)
def spec(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# acceptance criterion lines, printed together at the end of the run
_CRITERIA = {}
_CRITERIA_COUNT = 11


def record(number, title, passed, detail):
    _CRITERIA[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, _CRITERIA_COUNT + 1):
        if number in _CRITERIA:
            title, passed, detail = _CRITERIA[number]
            terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {number:2d} NOT RUN (errored or deselected)")
