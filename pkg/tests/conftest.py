import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scenred import DiscreteDistribution

FIXTURES = Path(__file__).parent / "fixtures"


def rational_weights(rng, n, denom_max=12):
    """Positive rationals a_i / D summing to one, with denominator <= denom_max."""
    denom = int(rng.integers(n, denom_max + 1)) if n <= denom_max else n
    cuts = np.sort(rng.choice(np.arange(1, denom), size=n - 1, replace=False)) if n > 1 else np.array([], dtype=int)
    parts = np.diff(np.concatenate([[0], cuts, [denom]]))
    return parts / denom


def random_distribution(rng, n=None, d=None, weighted=False, denom_max=12):
    n = int(rng.integers(2, 6)) if n is None else n
    d = int(rng.integers(1, 4)) if d is None else d
    points = rng.uniform(-1.0, 1.0, size=(n, d))
    weights = rational_weights(rng, n, denom_max) if weighted else None
    return DiscreteDistribution(points, weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
