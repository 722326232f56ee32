import numpy as np
import pytest

from _synth import foodtruck_like, planted_dataset


@pytest.fixture(scope="session")
def small_dataset():
    """80 x 6 dataset with 3 labels and planted signal."""
    return planted_dataset("small", 80, 6, 3, seed=11)


@pytest.fixture(scope="session")
def foodtruck_dataset():
    """Synthetic stand-in with the foodtruck corpus geometry (407 x 21, 12 labels)."""
    return foodtruck_like(seed=4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240809)
