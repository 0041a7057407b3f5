"""Tests for the endogenous, dynamics and empirical exogenous models"""
import numpy as np
import pytest

from app.libs.approx import FitConfig
from app.libs.collect import behavior_policy, collect_dataset
from app.libs.core import RngStream
from app.libs.envs import measure_air_epsilon
from app.libs.models import (
    DynamicsKind,
    LearnedEndoModel,
    ModelError,
    ModelNotFittedError,
    TabularEndoModel,
    build_replay_mdp,
    empirical_exo_mdp,
    endo_step,
    exact_endo_model,
    fit_dynamics_model,
    fit_endo_model,
    initial_distribution,
    one_hot_on_grid,
    to_endo_domain,
)

_SMALL_FIT = FitConfig(updates=50, batch_size=16, hidden=8, seed=4)


def test_empirical_exo_mdp_counts_transitions(tiny_order_dataset):
    """Each step's values are indexed and transitions are count ratios"""
    kernel = empirical_exo_mdp(tiny_order_dataset)

    np.testing.assert_array_equal(kernel.levels[0], [[0.4], [0.5]])
    np.testing.assert_array_equal(kernel.nu, [0.5, 0.5])
    np.testing.assert_array_equal(kernel.p_exo[0], np.eye(2))
    np.testing.assert_allclose(kernel.p_exo.sum(axis=2), 1.0)
    assert kernel.index(0, np.array([[0.5], [0.9]])).tolist() == [1, -1]


def test_empirical_exo_mdp_with_fixed_indices(tabular_env):
    """Tabular exo values index a common state set at every step"""
    policy = behavior_policy("tabular", "random", tabular_env.n_actions)
    d = collect_dataset(tabular_env, policy, 20, seed=3)
    kernel = empirical_exo_mdp(d, n_exo=3)

    assert kernel.n_states == 3
    assert all(len(levels) == 3 for levels in kernel.levels)
    np.testing.assert_allclose(kernel.p_exo.sum(axis=2), 1.0)


def test_replay_mdp_is_action_independent(order_env, order_dataset):
    """The replay MDP shares one exogenous kernel across actions"""
    sweep = order_env.air_spec().sweep_array()
    mdp = build_replay_mdp(
        order_dataset, exact_endo_model(order_env), sweep, r_max=order_env.r_max
    )

    assert measure_air_epsilon(mdp) == 0.0
    assert mdp.n_endo == len(sweep)
    np.testing.assert_allclose(mdp.nu.sum(), 1.0)


def test_initial_distribution_rejects_off_grid_values(tiny_order_dataset):
    """Every initial endogenous value must lie on the grid"""
    kernel = empirical_exo_mdp(tiny_order_dataset)
    with pytest.raises(ModelError, match="not on the grid"):
        initial_distribution(tiny_order_dataset, kernel, np.arange(5, dtype=float))


def test_one_hot_on_grid():
    grid = np.array([[0.0], [1.0], [2.0]])
    probs = one_hot_on_grid(np.array([[2.0], [0.0]]), grid)

    np.testing.assert_array_equal(probs, [[0, 0, 1], [1, 0, 0]])
    with pytest.raises(ModelError):
        one_hot_on_grid(np.array([[0.5]]), grid)


def test_exact_model_of_tabular_env_is_stochastic(tabular_env):
    """Tabular kernels are sampled and need a stream"""
    model = exact_endo_model(tabular_env)
    rows = (
        np.zeros((4, 1)),
        np.ones((4, 1)),
        np.array([0, 1, 0, 1]),
        np.full((4, 1), 2.0),
    )

    assert isinstance(model, TabularEndoModel)
    with pytest.raises(ModelError, match="rng"):
        model.step(0, *rows)
    next_endo, reward = model.step(0, *rows, RngStream(0))
    assert set(next_endo[:, 0]) <= {0.0, 1.0}
    np.testing.assert_array_equal(
        reward, tabular_env.mdp.r[0, 0, 1, [0, 1, 0, 1], 2]
    )


def test_to_endo_domain_clamps_and_rounds(order_env, inventory_env):
    values = np.array([[-1.2], [3.4], [12.0]])

    np.testing.assert_array_equal(to_endo_domain(values, order_env)[:, 0], [0, 3, 10])
    np.testing.assert_allclose(
        to_endo_domain(values, inventory_env)[:, 0], [0.0, 3.4, 12.0]
    )


def test_learned_endo_model_must_be_fitted(order_env):
    model = LearnedEndoModel(order_env, hidden=4, rng=RngStream(0))
    with pytest.raises(ModelNotFittedError):
        model.step(
            0, np.zeros((1, 3)), np.ones((1, 1)), np.array([0]), np.zeros((1, 3))
        )


def test_fit_endo_model_reports_heldout_error(order_env, order_dataset):
    """The fitted model stays in the endogenous domain and reports its error"""
    model = fit_endo_model(order_dataset, _SMALL_FIT, order_env)
    t = order_dataset.transitions
    next_endo, reward = model.step(t.h, t.exo, t.endo, t.action, t.next_exo)

    assert model.report.n_heldout > 0
    assert model.report.heldout_mae >= 0.0
    assert np.all((next_endo >= 0) & (next_endo <= 10))
    np.testing.assert_array_equal(next_endo, np.round(next_endo))
    expected = t.exo[:, -1] * np.minimum(t.action, t.endo[:, 0])
    np.testing.assert_allclose(reward, expected)


def test_learned_endo_model_round_trips(order_env, order_dataset):
    """A serialized learned model answers like the original"""
    model = fit_endo_model(order_dataset, _SMALL_FIT, order_env)
    restored = LearnedEndoModel.from_dict(model.to_dict(), order_env)
    t = order_dataset.transitions

    np.testing.assert_array_equal(
        restored.step(t.h, t.exo, t.endo, t.action, t.next_exo)[0],
        model.step(t.h, t.exo, t.endo, t.action, t.next_exo)[0],
    )


def test_exo_only_dynamics_ignores_endo(inventory_env, inventory_dataset):
    """The exogenous-only model predicts no endogenous value or reward"""
    model = fit_dynamics_model(
        inventory_dataset, DynamicsKind.EXO_ONLY, _SMALL_FIT, inventory_env
    )
    next_exo, next_endo, reward = model.predict(inventory_dataset.exo[:, 0])

    assert next_exo.shape == (8, 1)
    assert next_endo is None and reward is None
    assert model.heldout_mse is not None


def test_full_dynamics_needs_actions(inventory_env, inventory_dataset):
    """The full model answers every part and keeps rewards in range"""
    model = fit_dynamics_model(
        inventory_dataset, DynamicsKind.FULL, _SMALL_FIT, inventory_env
    )
    exo, endo = inventory_dataset.exo[:, 0], inventory_dataset.endo[:, 0]

    with pytest.raises(ModelError, match="endo values and actions"):
        model.predict(exo)
    _, next_endo, reward = model.predict(exo, endo, inventory_dataset.actions[:, 0])
    assert np.all(next_endo >= 0.0)
    assert np.all((reward >= -100.0) & (reward <= 0.0))


def test_endo_step_sells_what_the_inventory_allows(order_env):
    """Selling more than the remaining shares sells the remainder"""
    model = exact_endo_model(order_env)
    exo = np.full((2, 3), 0.5)
    endo = np.array([[2.0], [5.0]])
    next_endo, reward = endo_step(model, exo, endo, np.array([4, 1]), exo)

    np.testing.assert_array_equal(next_endo[:, 0], [0.0, 4.0])
    np.testing.assert_allclose(reward, [1.0, 0.5])
