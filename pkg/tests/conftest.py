import os

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=400, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def spd():
    """Random SPD matrix factory: spd(d, seed) -> (d, d) array."""

    def make(d, seed=0):
        gen = np.random.default_rng(seed)
        a = gen.normal(size=(d, d))
        return a @ a.T + d * np.eye(d) * 0.1 + np.diag(gen.uniform(0.5, 2.0, d))

    return make


def within_se(sample, target, k=3.0):
    """Mean of ``sample`` equals ``target`` within k standard errors."""
    sample = np.asarray(sample, float)
    se = sample.std(ddof=1) / np.sqrt(sample.size)
    return abs(sample.mean() - target) <= k * se


@pytest.fixture
def close_in_se():
    return within_se


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
