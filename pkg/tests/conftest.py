import warnings

import pytest
from hypothesis import settings

from deltanls.core import BoundaryLeakWarning, Grid

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_leaks():
    # leak warnings are tested explicitly where they matter
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        yield


@pytest.fixture(scope="session")
def grid():
    return Grid(4096, 40.0)


@pytest.fixture(scope="session")
def wide():
    return Grid(32768, 320.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
