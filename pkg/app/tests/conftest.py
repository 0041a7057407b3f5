from .utils.env import TEST_STORAGE_ROOT, setup_test_env

# set up the environment before any other import
setup_test_env()

import shutil
from pathlib import Path

import pytest

from ..libs.collect import behavior_policy, collect_dataset
from ..libs.core import Dataset, RngStream, read_dataset
from ..libs.envs import (
    Environment,
    TabularAirEnv,
    TabularMdp,
    make_env,
    make_random_tabular_air_mdp,
)
from .utils.fixtures import get_fixture_path

TINY_HORIZON = 5


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "slow: statistical or long-running checks, deselect with -m 'not slow'",
    )


@pytest.fixture(scope="session", autouse=True)
def storage_root():
    """the storage root of the test session, removed at the end"""
    Path(TEST_STORAGE_ROOT).mkdir(parents=True, exist_ok=True)
    yield Path(TEST_STORAGE_ROOT)
    shutil.rmtree(TEST_STORAGE_ROOT, ignore_errors=True)


@pytest.fixture
def order_env() -> Environment:
    """a short order execution instance"""
    yield make_env("order", 0.0, rng=RngStream(0, "instance"), horizon=TINY_HORIZON)


@pytest.fixture
def inventory_env() -> Environment:
    """a short inventory instance"""
    yield make_env("inventory", 0.0, rng=RngStream(0, "instance"), horizon=TINY_HORIZON)


@pytest.fixture
def order_dataset(order_env) -> Dataset:
    """random-policy order execution episodes with final states"""
    policy = behavior_policy("order", "random")
    yield collect_dataset(order_env, policy, n_episodes=8, seed=1)


@pytest.fixture
def inventory_dataset(inventory_env) -> Dataset:
    """random-policy inventory episodes with final states"""
    policy = behavior_policy("inventory", "random")
    yield collect_dataset(inventory_env, policy, n_episodes=8, seed=1)


@pytest.fixture
def tiny_order_dataset() -> Dataset:
    """the two-episode order execution dataset stored in the fixtures"""
    yield read_dataset(get_fixture_path("tiny_order.csv"))


@pytest.fixture
def tabular_mdp() -> TabularMdp:
    """a small random tabular MDP with a slightly action-dependent exo kernel"""
    yield make_random_tabular_air_mdp(
        n_exo=3, n_endo=2, n_actions=2, horizon=3, eps_air=0.1, rng=RngStream(7, "mdp")
    )


@pytest.fixture
def tabular_env(tabular_mdp) -> TabularAirEnv:
    yield TabularAirEnv(tabular_mdp)
