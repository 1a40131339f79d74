import numpy as np
import pytest

from delaunay4.constants import make_params
from delaunay4.orbits import cached_orbit

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def p5():
    return make_params(5)


@pytest.fixture(scope="session")
def orbit_of():
    """Memoized orbit lookup by fraction of a0 (n = 5)."""
    p = make_params(5)
    return lambda frac: cached_orbit(5, float(frac) * p.a0)


@pytest.fixture(scope="session")
def orbit06(orbit_of):
    return orbit_of(0.6)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
