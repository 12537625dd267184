import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_fb(rng, f_min=0.2, f_max=1.5, b_max=1.0):
    F = rng.uniform(f_min, f_max) * rng.choice([-1.0, 1.0])
    b = rng.uniform(-b_max, b_max)
    return float(F), float(b)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
