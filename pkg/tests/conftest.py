import numpy as np
import pytest

from stochnls import GridSpec, ModelParams

VERDICTS: list[str] = []


def record_verdict(name: str, passed: bool, detail: str) -> None:
    VERDICTS.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # Re-print one verdict line per gate check after the captured output,
    # so the measured numbers are visible in a plain `pytest` run.
    if VERDICTS:
        terminalreporter.section("gate checks")
        for line in VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture
def grid64():
    return GridSpec(64)


@pytest.fixture
def grid8():
    return GridSpec(8)


@pytest.fixture
def default_params():
    return ModelParams(theta=1.0, lam=1.0, sigma=1.0, epsilon=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def random_state(grid, rng, unit_norm=True):
    u = rng.standard_normal(grid.n_interior) + 1j * rng.standard_normal(grid.n_interior)
    if unit_norm:
        from stochnls import discrete_l2_norm

        u = u / discrete_l2_norm(u, grid)
    return u
