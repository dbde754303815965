import numpy as np
import pytest

from dpsurf.config import Configuration


def random_config(rng, counts=None, T=None):
    """A valid, generally unbalanced configuration with points of modulus 0.3..3."""
    if counts is None:
        N = 2 * int(rng.integers(1, 3))
        counts = [int(rng.integers(1, 4)) for _ in range(N)]
    if T is None:
        T = complex(rng.normal(scale=0.3), rng.normal(scale=0.3)) if rng.random() < 0.5 else 0j
    levels = []
    for n in counts:
        mod = np.exp(rng.uniform(np.log(0.3), np.log(3.0), n))
        levels.append(mod * np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
    return Configuration(levels, T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_random():
    return random_config


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
