import math
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from gpsolve.grid import Domain, build_grid

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def interval_grid():
    return build_grid(Domain.interval(math.pi), 200)


@pytest.fixture(scope="session")
def square_grid():
    return build_grid(Domain.rectangle(1.0, 1.0), 24)


@pytest.fixture(scope="session")
def ball_grid():
    return build_grid(Domain.ball(1.0, 3), 200)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def bvp_oracle():
    """(omega, profile) of the single cubic equation on (0, pi) with unit mass."""
    import oracles
    return oracles.single_equation_bvp(1.0, 3.0, math.pi)
