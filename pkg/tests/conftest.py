import numpy as np
import pytest

from nsbfault import NsbProblem
from nsbfault.experiment import random_problem

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_random_problem(rng, n, m, noise_low=0.0, noise_high=0.5, zero_noise_frac=0.0):
    """Random valid problem with fault-dependent noise (patterns may repeat)."""
    patterns = rng.choice([-1, 1], size=(m, n))
    noise = rng.uniform(noise_low, noise_high, size=(m, n))
    if zero_noise_frac:
        noise[rng.random((m, n)) < zero_noise_frac] = 0.0
    priors = rng.dirichlet(np.ones(m))
    return NsbProblem(None, priors, patterns, noise)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_problem():
    return random_problem(5, 4, seed=7, prior_mode="dirichlet")
