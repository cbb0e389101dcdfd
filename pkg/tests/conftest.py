import numpy as np
import pytest

from cdflags.kernels import binomial_kernel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def szego():
    return binomial_kernel(1)


@pytest.fixture(scope="session")
def bergman():
    return binomial_kernel(2)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance PASS/FAIL lines collected by test_acceptance."""
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
