import numpy as np
import pytest

from respgames.fixtures import data_path, load_junction


@pytest.fixture(scope="session")
def junction():
    return load_junction()


@pytest.fixture(scope="session")
def game(junction):
    return junction.game


@pytest.fixture(scope="session")
def profiles(junction):
    return junction.profiles


@pytest.fixture(scope="session")
def junction_path():
    return str(data_path("junction.csg"))


@pytest.fixture(scope="session")
def utility_path():
    return str(data_path("junction_utilities.txt"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
