import numpy as np
import pytest

ACCEPTANCE_LINES = []


def multisphere_point(rng, C0, d):
    x = rng.standard_normal((C0, d))
    return x / np.linalg.norm(x, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _criterion_number(line):
    return int(line.split("criterion ")[1].split(":")[0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion_number):
            terminalreporter.write_line(line)
