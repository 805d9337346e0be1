import numpy as np
import pytest

from invsizer.data import generate, split_dataset


@pytest.fixture(scope="session")
def csva():
    return generate("CSVA")


@pytest.fixture(scope="session")
def csva_split(csva):
    return split_dataset(csva, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
