import numpy as np
import pytest

from se2inpaint.grid import GridSpec

# One line per acceptance criterion, filled by test_acceptance.py and
# printed at the end of the session.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["periodic", "reflect"])
def boundary(request):
    return request.param


@pytest.fixture
def small_spec(boundary):
    return GridSpec(5, 5, 4, boundary=boundary)
