"""Measurement oracles wrapping an exit solver."""

import numpy as np

from .dynamics import Measurement


class NoisyOracle:
    """Adds seeded Gaussian noise of size ``sigma`` to every measured
    quantity of a launch that enters; non-entering launches stay exact."""

    def __init__(self, oracle, sigma, seed=0):
        self.oracle = oracle
        self.sigma = float(sigma)
        self.rng = np.random.default_rng(seed)

    def measure(self, x, y):
        m = self.oracle.measure(x, y)
        if m.tau_plus == 0.0 or self.sigma == 0.0:
            return m
        e = self.rng.normal(0.0, self.sigma, 5)
        comp = None if m.companion is None else m.companion + e[3:]
        return Measurement(m.tau_plus + e[0], m.exit_point + e[1:3], comp)


class CountingOracle:
    """Counts queries passed through to ``oracle``."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.calls = 0

    def measure(self, x, y):
        self.calls += 1
        return self.oracle.measure(x, y)
