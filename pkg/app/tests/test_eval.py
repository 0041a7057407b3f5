"""Tests for the replay estimate, Monte Carlo returns, bounds, oracles and selection"""
import math

import numpy as np
import pytest

from app.libs.algos import TabularPolicy, fqi_air_sweep
from app.libs.approx import FitConfig, FunctionClass
from app.libs.collect import behavior_policy, collect_dataset
from app.libs.core import AirSpec, EmptyDatasetError, RngStream
from app.libs.envs import (
    TabularAirEnv,
    make_random_tabular_air_mdp,
    measure_air_epsilon,
    perturb_endo_kernel,
)
from app.libs.eval import (
    BoundParameterError,
    OfflineSelectionContext,
    OnlineSelectionContext,
    SelectionError,
    SelectionMode,
    baseline_gap_bound,
    build_baseline_mdp,
    dp_solve,
    eval_bound_thm2,
    j_hat,
    j_true_mc,
    max_row_l1_gap,
    select_hyperparams,
    simulation_bound,
    subopt_bound_thm1,
)
from app.libs.models import build_replay_mdp, empirical_exo_mdp, exact_endo_model

_SMALL_FIT = FitConfig(updates=30, batch_size=16, hidden=8, seed=2)
_SPEC = AirSpec(horizon=10, eps_air=0.1, r_max=1.0, n_actions=2, endo_sweep=[0, 1, 2])


def _uniform_policy(mdp) -> TabularPolicy:
    shape = (mdp.horizon, mdp.n_exo, mdp.n_endo, mdp.n_actions)
    return TabularPolicy(np.full(shape, 1.0 / mdp.n_actions))


def test_eval_bound():
    """v_max (H eps_air + H eps_p + sqrt(ln(2 / zeta) / 2n))"""
    expected = 10.0 * (10 * 0.1 + math.sqrt(math.log(2 / 0.05) / 200))

    assert eval_bound_thm2(100, 0.05, _SPEC) == pytest.approx(expected)
    assert eval_bound_thm2(400, 0.05, _SPEC) < eval_bound_thm2(100, 0.05, _SPEC)


def test_subopt_bound():
    expected = 2 * 10 * 10 * 0.1 + 11 * 10 * math.sqrt(6) * math.sqrt(
        72 * 100 * math.log(10 * 50 * 6 / 0.1) / 1000 + 2 * 0.01
    )
    assert subopt_bound_thm1(1000, 0.1, _SPEC, 50, 0.01) == pytest.approx(expected)


def test_simulation_and_baseline_bounds():
    assert simulation_bound(0.1, 10, 1.0) == pytest.approx(5.0)
    assert baseline_gap_bound(_SPEC) == pytest.approx(10.0)


@pytest.mark.parametrize(
    "call",
    [
        lambda: eval_bound_thm2(10, 0.0, _SPEC),
        lambda: eval_bound_thm2(10, 1.0, _SPEC),
        lambda: eval_bound_thm2(0, 0.1, _SPEC),
        lambda: subopt_bound_thm1(10, 0.1, _SPEC, 0, 0.0),
        lambda: subopt_bound_thm1(10, 0.1, _SPEC, 5, -1.0),
        lambda: simulation_bound(-0.1, 10, 1.0),
    ],
)
def test_bounds_reject_bad_parameters(call):
    with pytest.raises(BoundParameterError):
        call()


def test_replay_estimate_is_exact_value_on_the_replay_mdp(order_env, order_dataset):
    """Replaying a policy equals evaluating it exactly on the replay MDP"""
    model = exact_endo_model(order_env)
    spec = order_env.air_spec()
    policy = fqi_air_sweep(order_dataset, model, spec, FunctionClass.MLP, _SMALL_FIT)

    sweep = spec.sweep_array()
    replay_mdp = build_replay_mdp(order_dataset, model, sweep, r_max=order_env.r_max)
    kernel = empirical_exo_mdp(order_dataset)
    exact = dp_solve(
        replay_mdp, policy, exo_values=kernel.padded_levels, endo_values=sweep
    ).j

    report = j_hat(policy, order_dataset, model, spec, RngStream(0))
    assert report.j_hat == pytest.approx(exact, abs=1e-9)


def test_j_hat_report(order_env, order_dataset):
    """The report carries the per-trajectory returns and the radius"""
    spec = order_env.air_spec()
    policy = behavior_policy("order", "constant")
    model = exact_endo_model(order_env)
    report = j_hat(policy, order_dataset, model, spec, RngStream(3), zeta=0.1)

    assert report.n_traj == 8
    assert report.j_hat == pytest.approx(np.mean(report.returns))
    assert report.bound == eval_bound_thm2(8, 0.1, spec)
    assert report.to_row()["seed"] == 3
    # never selling earns nothing
    assert report.returns == (0.0,) * 8


def test_j_hat_unbiased_uses_the_evaluation_half(order_env, order_dataset):
    report = j_hat(
        behavior_policy("order", "constant"),
        order_dataset,
        exact_endo_model(order_env),
        order_env.air_spec(),
        RngStream(0),
        unbiased=True,
    )
    assert report.n_traj == 4


def test_j_hat_errors(order_env, order_dataset):
    model, spec = exact_endo_model(order_env), order_env.air_spec()
    policy = behavior_policy("order", "constant")

    with pytest.raises(EmptyDatasetError):
        j_hat(policy, order_dataset.subset([]), model, spec, RngStream(0))
    with pytest.raises(BoundParameterError):
        j_hat(policy, order_dataset, model, spec, RngStream(0), zeta=1.5)


def test_j_true_mc_is_reproducible(order_env):
    policy = behavior_policy("order", "random")
    first = j_true_mc(policy, order_env, 5, RngStream(4))
    second = j_true_mc(policy, order_env, 5, RngStream(4))

    assert first == second
    assert len(first.returns) == 5
    assert first.stderr >= 0.0


def test_dp_solve_optimal_dominates(tabular_mdp):
    """The optimal value is at least the value of any other policy"""
    optimal = dp_solve(tabular_mdp)
    uniform = dp_solve(tabular_mdp, _uniform_policy(tabular_mdp))

    assert optimal.j >= uniform.j
    np.testing.assert_array_equal(optimal.values[-1], 0.0)


_RANDOM_MDP_SEEDS = [7, 11, 23, 42, 101]


def _random_mdp(seed: int, eps_air: float = 0.1, horizon: int = 3):
    return make_random_tabular_air_mdp(
        n_exo=3,
        n_endo=2,
        n_actions=2,
        horizon=horizon,
        eps_air=eps_air,
        rng=RngStream(seed, "mdp"),
    )


@pytest.mark.parametrize("eps_p", [0.05, 0.2, 0.5, 1.0])
@pytest.mark.parametrize("seed", _RANDOM_MDP_SEEDS)
def test_simulation_bound_holds(seed, eps_p):
    """Values of one policy in two close MDPs differ by at most the bound"""
    mdp = _random_mdp(seed, horizon=4)
    perturbed, _ = perturb_endo_kernel(mdp, eps_p, RngStream(seed, "perturb"))
    gap = max_row_l1_gap(mdp, perturbed)
    bound = simulation_bound(gap, mdp.horizon, mdp.r_max)

    for policy in (dp_solve(mdp).policy, _uniform_policy(mdp)):
        difference = abs(dp_solve(mdp, policy).j - dp_solve(perturbed, policy).j)
        assert difference <= bound + 1e-12


@pytest.mark.parametrize("eps_air", [0.05, 0.2, 0.5])
@pytest.mark.parametrize("seed", _RANDOM_MDP_SEEDS)
def test_baseline_mdp_is_action_independent(seed, eps_air):
    """The baseline follows the behavior's exo flow and stays within the gap bound"""
    mdp = _random_mdp(seed, eps_air=eps_air)
    behavior = _uniform_policy(mdp)
    baseline = build_baseline_mdp(mdp, behavior)
    spec = AirSpec(
        horizon=mdp.horizon,
        eps_air=measure_air_epsilon(mdp),
        r_max=mdp.r_max,
        n_actions=mdp.n_actions,
        endo_sweep=list(range(mdp.n_endo)),
    )

    assert measure_air_epsilon(baseline) == 0.0
    for policy in (dp_solve(mdp).policy, behavior):
        difference = abs(dp_solve(mdp, policy).j - dp_solve(baseline, policy).j)
        assert difference <= baseline_gap_bound(spec) + 1e-12


def test_baseline_of_a_zero_air_mdp_is_the_mdp():
    mdp = make_random_tabular_air_mdp(3, 2, 2, 4, eps_air=0.0, rng=RngStream(5, "mdp"))
    baseline = build_baseline_mdp(mdp, _uniform_policy(mdp))
    policy = dp_solve(mdp).policy

    assert dp_solve(baseline, policy).j == pytest.approx(dp_solve(mdp, policy).j)


def test_offline_selection_ties_go_to_the_first(order_env, order_dataset):
    """Identical candidates score alike and the earliest wins"""
    model = exact_endo_model(order_env)
    spec = order_env.air_spec()
    context = OfflineSelectionContext(
        dataset=order_dataset,
        endo_model=model,
        spec=spec,
        train=lambda cfg, d: fqi_air_sweep(d, model, spec, FunctionClass.TABULAR, cfg),
    )
    result = select_hyperparams(
        [FitConfig(seed=1), FitConfig(seed=1)], SelectionMode.OFFLINE_JHAT, context
    )

    assert result.index == 0
    assert result.scores[0] == result.scores[1]


def test_online_selection_scores_by_rollouts(order_env, order_dataset):
    """Never selling loses against the random seller in the true environment"""
    context = OnlineSelectionContext(
        dataset=order_dataset,
        train=lambda kind, d: behavior_policy("order", kind),
        make_env=lambda: order_env,
        n_rollouts=10,
    )
    result = select_hyperparams(
        ["constant", "random"], SelectionMode.ONLINE_JTRUE, context
    )

    assert result.best == "random"
    assert result.scores[0] == 0.0


def test_selection_errors(order_dataset):
    context = OnlineSelectionContext(
        dataset=order_dataset, train=lambda c, d: None, make_env=lambda: None
    )
    with pytest.raises(SelectionError, match="no candidates"):
        select_hyperparams([], SelectionMode.ONLINE_JTRUE, context)
    with pytest.raises(SelectionError, match="OfflineSelectionContext"):
        select_hyperparams([1], SelectionMode.OFFLINE_JHAT, context)


@pytest.mark.slow
def test_eval_bound_covers_the_replay_error():
    """The radius covers |j_hat - J| in at least a 1 - zeta share of datasets"""
    mdp = make_random_tabular_air_mdp(3, 2, 2, 3, eps_air=0.1, rng=RngStream(2, "mdp"))
    env = TabularAirEnv(mdp)
    model = exact_endo_model(env)
    spec = env.air_spec()
    policy = dp_solve(mdp).policy
    truth = dp_solve(mdp, policy).j
    zeta = 0.1

    covered = 0
    trials = 50
    for trial in range(trials):
        behavior = behavior_policy("tabular", "random", 2)
        d = collect_dataset(env, behavior, 50, seed=trial)
        report = j_hat(policy, d, model, spec, RngStream(trial, "replay"), zeta=zeta)
        covered += abs(report.j_hat - truth) <= report.bound

    assert covered >= (1 - zeta) * trials
