import numpy as np
import pytest

from fpspec import (CNConfig, Weight, build_spectral_set, dirac_pair, evolve_cn, make_grid,
                    make_initial)

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, passed: bool, detail: str) -> None:
    """Store one summary line; printed after the run whatever the outcome."""
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def wide_grid():
    # same spacing as the default grid, box wide enough that f_0 (eps = alpha = 2)
    # drops to the rounding floor at the edges
    return make_grid(-40.0, 40.0, 2401)


@pytest.fixture(scope="session")
def weight():
    return Weight(1.0)


@pytest.fixture(scope="session")
def pair():
    return dirac_pair(2.0, 2.0)


@pytest.fixture(scope="session")
def sset(pair, weight, grid):
    return build_spectral_set(pair, weight, grid, 4)


@pytest.fixture(scope="session")
def wide_set(pair, weight, wide_grid):
    return build_spectral_set(pair, weight, wide_grid, 4)


@pytest.fixture(scope="session")
def figure_runs(pair, weight, sset):
    """Both decay experiments on the default configuration, with wall times."""
    import time

    out = {}
    for name in ("phi1", "phi2"):
        phi = make_initial(name, sset)
        t0 = time.perf_counter()
        traj = evolve_cn(pair, phi, CNConfig(1e-3, 10.0, 10), weight)
        out[name] = (phi, traj, time.perf_counter() - t0)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
