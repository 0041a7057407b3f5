"""Tests for the benchmark environments, tabular MDPs and series ingestion"""
import numpy as np
import pytest

from app.libs.collect import behavior_policy, collect_dataset
from app.libs.core import FactoredState, RngStream
from app.libs.envs import (
    EnvError,
    InvalidMdpError,
    SeriesParseError,
    SeriesTooShortError,
    UnknownEnvError,
    arma_exo_step,
    inventory_transition,
    load_exo_series_csv,
    make_env,
    make_random_tabular_air_mdp,
    measure_air_epsilon,
    order_exec_transition,
    perturb_endo_kernel,
)
from app.tests.utils.fixtures import get_fixture_path


def test_make_env_rejects_unknown_ids():
    """Only the simulated environments can be made by id"""
    with pytest.raises(UnknownEnvError, match="unknown environment 'pong'"):
        make_env("pong", 0.0, rng=RngStream(0))


def test_order_exec_episode(order_env):
    """Selling moves shares out of the endo state and earns price times shares"""
    state = order_env.reset(RngStream(0, "episode"))
    assert state.endo == 10
    assert len(state.exo) == 3

    next_state, reward = order_env.step(4)
    assert next_state.endo == 6
    assert reward == pytest.approx(4 * state.exo[-1])
    assert next_state.exo[:2] == state.exo[1:]


def test_order_exec_cannot_oversell(order_env):
    """Actions beyond the remaining shares sell what is left"""
    state = FactoredState(exo=(0.5, 0.5, 0.5), endo=2)
    next_state, reward = order_env.transition(state, 5, RngStream(1))

    assert next_state.endo == 0
    assert reward == pytest.approx(1.0)


@pytest.mark.parametrize(
    "env_id, transition",
    [("order", order_exec_transition), ("inventory", inventory_transition)],
)
def test_transition_functions_match_the_environment(env_id, transition):
    """The functional transitions step the environment like its own method"""
    first = make_env(env_id, 0.3, rng=RngStream(2, "instance"), horizon=4)
    second = make_env(env_id, 0.3, rng=RngStream(2, "instance"), horizon=4)
    state = first.reset(RngStream(0, "episode"))
    second.reset(RngStream(0, "episode"))

    assert transition(first, state, 1, RngStream(5)) == second.transition(
        state, 1, RngStream(5)
    )


def test_arma_exo_step_publishes_a_bounded_price():
    """Without impact the price stays in [0, 1] whatever was sold"""
    first = make_env("order", 0.0, rng=RngStream(4, "instance"), horizon=4)
    second = make_env("order", 0.0, rng=RngStream(4, "instance"), horizon=4)
    first.reset(RngStream(1, "episode"))
    second.reset(RngStream(1, "episode"))

    sold = arma_exo_step(first, True, RngStream(6))
    held = arma_exo_step(second, False, RngStream(6))
    assert 0.0 <= sold <= 1.0
    assert sold == held


def test_order_exec_rejects_steps_after_the_end(order_env):
    """Episodes stop after H steps"""
    order_env.reset(RngStream(0))
    for _ in range(order_env.horizon):
        order_env.step(0)

    with pytest.raises(EnvError, match="episode is over"):
        order_env.step(0)


def test_frozen_noise_makes_prices_deterministic():
    """With frozen innovations and no impact every episode sees the same prices"""
    env = make_env(
        "order", 0.0, rng=RngStream(3, "instance"), horizon=6, frozen_noise=True
    )
    policy = behavior_policy("order", "random")
    d = collect_dataset(env, policy, n_episodes=4, seed=9)

    trajectories = d.exo_trajectories()
    for other in trajectories[1:]:
        np.testing.assert_array_equal(other, trajectories[0])


@pytest.mark.parametrize("env_id", ["order", "inventory"])
def test_exo_independent_of_actions_without_impact(env_id):
    """At eps_air = 0 the exogenous columns do not depend on the behavior"""
    env = make_env(env_id, 0.0, rng=RngStream(0, "instance"), horizon=8)
    random_data = collect_dataset(env, behavior_policy(env_id, "random"), 3, seed=2)
    constant_data = collect_dataset(env, behavior_policy(env_id, "constant"), 3, seed=2)

    np.testing.assert_array_equal(
        random_data.exo_trajectories(), constant_data.exo_trajectories()
    )


def test_inventory_reward_needs_next_demand(inventory_env):
    """The inventory reward is defined by the demand after the order"""
    with pytest.raises(EnvError, match="next demand"):
        inventory_env.endo_transition(
            0, np.array([[5.0]]), np.array([[0.0]]), np.array([2]), None
        )


def test_inventory_costs(inventory_env):
    """Order, holding and lost-sale costs are charged against the next demand"""
    next_endo, reward = inventory_env.endo_transition(
        0,
        np.array([[5.0], [5.0]]),
        np.array([[2.0], [0.0]]),
        np.array([4, 1]),
        np.array([[3.0], [4.0]]),
    )

    np.testing.assert_allclose(next_endo[:, 0], [3.0, 0.0])
    np.testing.assert_allclose(reward, [-(0.4 + 0.75), -(0.1 + 3.0)])


def test_random_tabular_mdp_is_eps_air():
    """The measured AIR epsilon lies in [eps / 2, eps]"""
    m = make_random_tabular_air_mdp(4, 3, 3, 5, eps_air=0.2, rng=RngStream(1, "mdp"))
    eps = measure_air_epsilon(m)

    assert 0.1 - 1e-12 <= eps <= 0.2 + 1e-12


def test_random_tabular_mdp_single_action_is_zero_air():
    """The perturbation needs two actions; otherwise the MDP is 0-AIR"""
    m = make_random_tabular_air_mdp(3, 2, 1, 2, eps_air=0.3, rng=RngStream(1, "mdp"))

    assert measure_air_epsilon(m) == 0.0


def test_tabular_mdp_validation(tabular_mdp):
    """Kernels must be distributions and rewards bounded by r_max"""
    bad = tabular_mdp.p_exo.copy()
    bad[0, 0, 0] = 0.0
    with pytest.raises(InvalidMdpError, match="p_exo rows do not sum to 1"):
        tabular_mdp.replace(p_exo=bad)
    with pytest.raises(InvalidMdpError, match="exceed r_max"):
        tabular_mdp.replace(r=tabular_mdp.r * 3, r_max=1.0)


def test_perturb_endo_kernel_stays_within_eps(tabular_mdp):
    """The achieved total variation of the perturbation is at most eps_p"""
    perturbed, achieved = perturb_endo_kernel(tabular_mdp, 0.3, RngStream(2))

    assert 0.0 < achieved <= 0.3
    np.testing.assert_allclose(perturbed.p_end.sum(axis=-1), 1.0)


def test_tabular_env_rolls_out_mdp(tabular_env):
    """The step-wise env walks the tabular kernels for H steps"""
    state = tabular_env.reset(RngStream(0))
    total = 0.0
    while not tabular_env.done:
        state, reward = tabular_env.step(1)
        total += reward

    assert tabular_env.h == 3
    assert 0 <= state.endo < 2
    assert 0.0 <= total <= 3.0


def test_load_exo_series_csv():
    """A series is cut into windows of H + 1 exogenous vectors"""
    episodes = load_exo_series_csv(get_fixture_path("prices.csv"), window=2, horizon=3)

    assert len(episodes) == 2
    assert episodes[0].shape == (4, 2)
    np.testing.assert_allclose(episodes[0][0], [0.50, 0.52])
    np.testing.assert_allclose(episodes[1][0], [0.47, 0.51])


def test_load_exo_series_csv_errors(tmp_path):
    """Short series and non-numeric cells are refused"""
    with pytest.raises(SeriesTooShortError):
        load_exo_series_csv(get_fixture_path("prices.csv"), window=3, horizon=10)

    bad = tmp_path / "bad.csv"
    bad.write_text("price\n0.5\nabc\n0.4\n")
    with pytest.raises(SeriesParseError, match="line 3"):
        load_exo_series_csv(bad, window=1, horizon=1)
