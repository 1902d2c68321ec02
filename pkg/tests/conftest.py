import numpy as np
import pytest

from memcap import from_physical

H2_23 = 0.9182958340544896   # binary entropy of 2/3 in bits


@pytest.fixture(scope="session")
def param_grid():
    """Seeded grid of valid channel parameters across the CP window."""
    rng = np.random.default_rng(20260809)
    grid = []
    for _ in range(25):
        s = float(rng.uniform(-0.9, 0.9))
        a = float(rng.uniform(1.0 / 3.0, 1.0))
        dmax = min(a - 1.0 / 3.0, 1.0 - a)
        d = float(rng.uniform(-dmax, dmax)) if dmax > 0 else 0.0
        grid.append(from_physical(s, a, d))
    return grid
