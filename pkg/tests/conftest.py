import numpy as np
import pytest

from bernwass.datasets import Dataset

# Filled by tests/test_acceptance.py, printed at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spd(rng, d, scale=1.0, floor=1e-3):
    a = rng.standard_normal((d, d))
    return scale * (a @ a.T) + floor * np.eye(d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_data():
    xs = np.linspace(0.0, 1.0, 200)
    ys = np.column_stack([1.0 + 2.0 * xs, -0.5 + 0.7 * xs])
    return Dataset(xs, ys, name="line")
