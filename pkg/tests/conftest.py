import numpy as np
import pytest

from cmlab.arith import prime_flags


@pytest.fixture(scope="session")
def flags_1e6():
    return prime_flags(1_000_000)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240211)
