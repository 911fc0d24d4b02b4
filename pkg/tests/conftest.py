import numpy as np
import pytest

from copoly.model import validate_rates

REF_K_PLUS = (1.0, 1.2)
REF_K_MINUS = (1.8, 2.592)


@pytest.fixture
def ref_rates():
    return validate_rates(REF_K_PLUS, REF_K_MINUS)


@pytest.fixture
def sym_rates():
    """k+ = (1, 3), k- = (1, 1): limiting fractions (0.25, 0.75), v = 3."""
    return validate_rates([1.0, 3.0], [1.0, 1.0])


@pytest.fixture
def recurrent_rates():
    return validate_rates([0.3, 0.2], [1.0, 1.0])


def random_rate_sets(n, seed, d_range=(1, 6), low=0.01, high=10.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        kp = 10 ** rng.uniform(np.log10(low), np.log10(high), d)
        km = 10 ** rng.uniform(np.log10(low), np.log10(high), d)
        out.append(validate_rates(kp, km))
    return out
