import random
from fractions import Fraction

import numpy as np
import pytest


def geometric_sum_prob(t, omega, m):
    """Brute-force |2^-t sum_j exp(2 pi i j (omega - m/2^t))|^2 (oracle)."""
    j = np.arange(1 << t)
    delta = float(Fraction(omega) - Fraction(m, 1 << t))
    return abs(np.exp(2j * np.pi * j * delta).sum() / (1 << t)) ** 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_rationals():
    gen = random.Random(2024)

    def draw(n, max_den=100):
        out = []
        for _ in range(n):
            den = gen.randint(1, max_den)
            out.append(Fraction(gen.randrange(den), den))
        return out

    return draw


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
