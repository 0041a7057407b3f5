"""Tests for behavior policies, dataset collection and the online collector"""
import numpy as np
import pytest

from app.libs.algos import GreedyPolicy, policy_from_text, policy_to_text
from app.libs.approx import FitConfig
from app.libs.collect import (
    CollectError,
    FixedRulePolicy,
    ReplayBuffer,
    UnknownPolicyError,
    behavior_policy,
    collect_dataset,
    epsilon_at,
    train_online_collector,
)
from app.libs.core import RngStream, write_dataset


def test_order_random_behavior_mostly_waits():
    """The random seller idles three times out of four"""
    policy = behavior_policy("order", "random")
    actions = policy.act(0, np.zeros((4000, 3)), np.full((4000, 1), 10.0), RngStream(0))

    assert np.mean(actions == 0) == pytest.approx(0.75, abs=0.03)
    assert set(np.unique(actions)) == set(range(6))


def test_inventory_behaviors_follow_the_last_demand():
    exo = np.array([[4.6], [0.5], [30.0]])
    endo = np.zeros((3, 1))

    constant = behavior_policy("inventory", "constant").act(0, exo, endo)
    random = behavior_policy("inventory", "random").act(0, exo, endo, RngStream(1))

    assert constant.tolist() == [4, 0, 10]
    assert 2 <= random[0] <= 7
    assert 0 <= random[1] <= 3
    assert random[2] == 10


def test_behavior_policy_errors():
    with pytest.raises(UnknownPolicyError, match="unknown behavior policy"):
        behavior_policy("order", "greedy")
    with pytest.raises(UnknownPolicyError, match="no behavior policies"):
        behavior_policy("pong", "random")
    with pytest.raises(CollectError, match="need an rng"):
        behavior_policy("order", "random").act(0, np.zeros((1, 3)), np.ones((1, 1)))


def test_fixed_rule_policy_survives_text():
    policy = behavior_policy("inventory", "constant")
    restored = policy_from_text(policy_to_text(policy))

    assert isinstance(restored, FixedRulePolicy)
    assert restored.to_dict() == policy.to_dict()


def test_collect_dataset_records_full_episodes(order_env):
    d = collect_dataset(order_env, behavior_policy("order", "random"), 3, seed=4)

    assert len(d) == 3
    assert d.horizon == order_env.horizon
    assert d.has_final_states
    assert d.meta.policy == "fixed"
    np.testing.assert_array_equal(d.endo[:, 0, 0], 10.0)


def test_collect_dataset_without_final_states(order_env, tmp_path):
    """Every episode keeps exactly H rows; the recorded steps are unchanged"""
    policy = behavior_policy("order", "random")
    d = collect_dataset(order_env, policy, 5, seed=4, final_state=False)
    full = collect_dataset(order_env, policy, 5, seed=4)

    assert not d.has_final_states
    assert d.next_exo(order_env.horizon - 1) is None
    assert all(len(ep.steps) == order_env.horizon for ep in d.episodes)
    np.testing.assert_array_equal(d.exo, full.exo)
    np.testing.assert_array_equal(d.rewards, full.rewards)

    write_dataset(d, tmp_path / "order.csv")
    lines = (tmp_path / "order.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 5 * order_env.horizon


def test_collect_dataset_is_independent_of_workers(order_env, tmp_path):
    """Episodes depend only on (seed, index)"""
    policy = behavior_policy("order", "random")
    serial = collect_dataset(order_env, policy, 4, seed=8, policy_name="random")
    parallel = collect_dataset(
        order_env, policy, 4, seed=8, n_workers=2, policy_name="random"
    )

    write_dataset(serial, tmp_path / "serial.csv")
    write_dataset(parallel, tmp_path / "parallel.csv")
    serial_bytes = (tmp_path / "serial.csv").read_bytes()
    assert serial_bytes == (tmp_path / "parallel.csv").read_bytes()


def test_collect_dataset_rejects_bad_sizes(order_env):
    policy = behavior_policy("order", "constant")
    with pytest.raises(CollectError, match="n_episodes"):
        collect_dataset(order_env, policy, 0, seed=0)
    with pytest.raises(CollectError, match="n_workers"):
        collect_dataset(order_env, policy, 1, seed=0, n_workers=0)


@pytest.mark.parametrize(
    "episode, expected", [(0, 1.0), (250, 0.525), (500, 0.05), (900, 0.05)]
)
def test_epsilon_schedule(episode, expected):
    assert epsilon_at(episode) == pytest.approx(expected)


def test_replay_buffer_wraps_around():
    buffer = ReplayBuffer(2, exo_dim=1, endo_dim=1)
    for i in range(3):
        buffer.add(0, (float(i),), (0.0,), 0, float(i), (0.0,), (0.0,))

    assert buffer.size == 2
    assert sorted(buffer.reward.tolist()) == [1.0, 2.0]


def test_online_collector_trains(order_env):
    """A short run yields a greedy policy and one return per episode"""
    policy, returns = train_online_collector(
        order_env,
        episodes=3,
        cfg=FitConfig(hidden=8, batch_size=4),
        rng=RngStream(0, "collector"),
        updates_per_episode=2,
    )

    assert isinstance(policy, GreedyPolicy)
    assert len(returns) == 3
    state = order_env.reset(RngStream(1))
    assert 0 <= policy.act_state(0, state) < order_env.n_actions
