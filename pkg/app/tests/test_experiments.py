"""Tests for the experiment harness: configs, training dispatch, figures and sweeps"""
import numpy as np
import pandas as pd
import pytest

from app.libs.algos import AlgorithmError, Policy
from app.libs.approx import LEARNING_RATES, FunctionClass, OptimizerName
from app.libs.core import RngStream
from app.services.experiments import (
    AlgoName,
    ConfigError,
    FigureId,
    ReproduceConfig,
    SweepConfig,
    TrainConfig,
    UnknownFigureError,
    candidate_configs,
    env_for_dataset,
    reproduce_figure,
    resolve_behavior,
    run_jobs,
    run_sweep,
    runs_for_scale,
    spec_for,
    summarize_curves,
    summarize_eval_error,
    train_policy,
)
from app.tests.utils.env import TEST_RUN_LOG_FILENAME
from app.tests.utils.fixtures import get_fixture_path, load_fixture

_TINY_REPRODUCE = get_fixture_path("reproduce.tiny.toml")
_TINY_SWEEP = get_fixture_path("sweep.tiny.toml")
_SMALL_TRAIN = TrainConfig(updates=5, hidden=8, B=8, K=2, M=2, iterations=2, seed=1)


@pytest.mark.parametrize(
    "runs, scale, expected", [(30, 0.1, 3), (30, 1.0, 30), (30, 0.01, 1), (5, 0.5, 3)]
)
def test_runs_for_scale(runs, scale, expected):
    assert runs_for_scale(runs, scale) == expected


@pytest.mark.parametrize("scale", [0.0, -0.5, 1.5])
def test_runs_for_scale_rejects_scales_outside_unit_interval(scale):
    with pytest.raises(ConfigError, match="scale"):
        runs_for_scale(30, scale)


def test_train_config_from_file():
    """key=value files are cast into the typed fields"""
    cfg = TrainConfig.from_file(get_fixture_path("train_config.txt"))

    assert cfg.fclass == FunctionClass.TABULAR
    assert cfg.updates == 20
    assert cfg.B == 16
    assert cfg.zeta == 0.05
    assert cfg.seed == 3
    assert cfg.fit_config().batch_size == 16


def test_train_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key 'learning_rate'"):
        TrainConfig.from_file(get_fixture_path("bad_train_config.txt"))


def test_train_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        TrainConfig.from_file(tmp_path / "absent.txt")


def test_train_config_rejects_invalid_values(tmp_path):
    path = tmp_path / "train.txt"
    path.write_text("zeta=1.5\n", encoding="utf-8")

    with pytest.raises(ConfigError, match="zeta"):
        TrainConfig.from_file(path)


def test_reproduce_config_from_toml():
    cfg = ReproduceConfig.from_toml(_TINY_REPRODUCE)

    assert cfg.envs == ["order"]
    assert cfg.algos == [AlgoName.FQI_AIR, AlgoName.FQI]
    assert cfg.runs == 2
    assert cfg.train_config(seed=4).fclass == FunctionClass.TABULAR
    assert cfg.train_config(seed=4, lr=0.01).lr == 0.01
    assert cfg.optimizers == [OptimizerName.ADAM]
    assert cfg.train_config(seed=4).iterations == cfg.fqi_iterations == 2


def test_reproduce_config_searches_optimizers_and_learning_rates():
    """The default grid holds three learning rates for each of two optimizers"""
    cfg = ReproduceConfig()

    assert cfg.learning_rates == [0.001, 0.0003, 0.0001] == list(LEARNING_RATES)
    assert cfg.optimizers == [OptimizerName.ADAM, OptimizerName.RMSPROP]
    assert cfg.fqi_iterations == 100
    assert cfg.train_config(seed=4).iterations == 100

    fqi_air = candidate_configs(AlgoName.FQI_AIR, cfg, seed=4)
    pairs = {(c.optimizer, c.lr) for c in fqi_air}
    assert len(fqi_air) == len(pairs) == 6
    assert pairs == {
        (optimizer, lr)
        for optimizer in (OptimizerName.ADAM, OptimizerName.RMSPROP)
        for lr in LEARNING_RATES
    }
    assert len(candidate_configs(AlgoName.FQI, cfg, seed=4)) == 6
    mbs = candidate_configs(AlgoName.MBS, cfg, seed=4)
    assert len(mbs) == 6 * len(cfg.mbs_thresholds)
    assert {c.b for c in mbs} == set(cfg.mbs_thresholds)
    assert len(candidate_configs(AlgoName.MB_EMPIRICAL, cfg, seed=4)) == 1
    assert all(c.seed == 4 for c in mbs)


@pytest.mark.parametrize("key", ["learning_rates", "optimizers"])
def test_reproduce_config_rejects_empty_grids(key):
    with pytest.raises(ValueError, match="must not be empty"):
        ReproduceConfig(**{key: []})


def test_sweep_config_from_toml():
    """The nested train table becomes a TrainConfig"""
    cfg = SweepConfig.from_toml(_TINY_SWEEP)
    raw = load_fixture("sweep.tiny.toml", fmt="toml")["sweep"]

    assert cfg.behavior == raw["behavior"] == "constant"
    assert cfg.n_grid == raw["n_grid"]
    assert cfg.train.fclass == FunctionClass.TABULAR
    assert cfg.train.B == 8


def test_toml_config_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[reproduce]\nruns = 0\n", encoding="utf-8")
    unknown = tmp_path / "unknown.toml"
    unknown.write_text("[sweep]\nalgo = 'fqi'\n", encoding="utf-8")

    with pytest.raises(ConfigError, match="bad.toml"):
        ReproduceConfig.from_toml(bad)
    with pytest.raises(ConfigError, match="unknown.toml"):
        SweepConfig.from_toml(unknown)
    with pytest.raises(ConfigError, match="cannot read"):
        ReproduceConfig.from_toml(tmp_path / "absent.toml")


@pytest.mark.parametrize("algo", list(AlgoName))
def test_every_algorithm_trains(algo, order_env, order_dataset):
    """Each named algorithm yields a policy acting in range"""
    policy = train_policy(algo, order_dataset, order_env, _SMALL_TRAIN)
    actions = policy.act(
        0, order_dataset.exo[:, 0], order_dataset.endo[:, 0], RngStream(0, "act")
    )

    assert isinstance(policy, Policy)
    assert np.all((actions >= 0) & (actions < order_env.n_actions))


def test_spec_for_cuts_the_sweep(order_env):
    spec = spec_for(order_env, TrainConfig(endo_sweep_max=3))

    assert max(spec.endo_sweep) <= 3
    with pytest.raises(AlgorithmError, match="no endo value"):
        spec_for(order_env, TrainConfig(endo_sweep_max=-1))


def test_env_for_dataset_rebuilds_the_instance(tiny_order_dataset):
    env = env_for_dataset(tiny_order_dataset.meta)

    assert env.horizon == 3
    assert env.n_actions == 3
    assert env.env_id == "order"


def test_resolve_behavior_returns_the_rule(order_env):
    assert resolve_behavior(order_env, "constant", seed=0).kind == "fixed"


def test_run_jobs_keeps_job_order():
    """Rows come back in job order for any number of workers"""
    jobs = list(range(5))
    serial = run_jobs(_square_rows, jobs)
    parallel = run_jobs(_square_rows, jobs, n_workers=2)

    assert serial == parallel == [{"x": x * x} for x in jobs]


def _square_rows(x):
    return [{"x": x * x}]


def test_summarize_eval_error():
    """The 90th percentile is taken per (env, eps_air, N) cell"""
    rows = [
        {"env": "order", "eps_air": 0.0, "N": 5, "abs_err": float(e)}
        for e in range(1, 11)
    ] + [{"env": "order", "eps_air": 0.4, "N": 5, "abs_err": 2.0}]

    summary = summarize_eval_error(rows)

    assert [(r["eps_air"], r["N"]) for r in summary] == [(0.0, 5), (0.4, 5)]
    assert summary[0]["p90_abs_err"] == pytest.approx(9.1)
    assert summary[1]["p90_abs_err"] == 2.0


def test_summarize_curves():
    """Several runs give the standard error of the run means"""
    def point(agent, run, mean, stderr):
        return {
            "env": "order",
            "agent": agent,
            "run": run,
            "iteration": 1,
            "return_mean": mean,
            "return_stderr": stderr,
        }

    rows = [point("api", 0, 1.0, 9.0), point("api", 1, 3.0, 9.0)]
    summary = summarize_curves(rows + [point("q_learning", 0, 2.0, 0.5)])

    assert summary[0]["return_mean"] == pytest.approx(2.0)
    assert summary[0]["return_stderr"] == pytest.approx(1.0)
    assert summary[1]["return_stderr"] == 0.5


def test_reproduce_simulation_figure(tmp_path):
    """One return per (behavior, algorithm, N, run) including the behavior itself"""
    cfg = ReproduceConfig.from_toml(_TINY_REPRODUCE)
    paths = reproduce_figure(FigureId.SIM_EPS0, tmp_path, seed=3, config=cfg)

    assert [p.name for p in paths] == ["sim_eps0.csv"]
    table = pd.read_csv(paths[0])
    assert list(table.columns) == ["env", "policy", "algo", "N", "run", "return"]
    assert len(table) == 2 * 2 * 2 * 3
    assert set(table["algo"]) == {"behavior", "fqi-air", "fqi"}
    assert (tmp_path / TEST_RUN_LOG_FILENAME).is_file()


def test_reproduce_eval_error_figure(tmp_path):
    cfg = ReproduceConfig.from_toml(_TINY_REPRODUCE)
    paths = reproduce_figure("eval_error", tmp_path, seed=3, config=cfg)

    summary, runs = (pd.read_csv(p) for p in paths)
    assert list(summary.columns) == ["env", "eps_air", "N", "p90_abs_err"]
    assert len(summary) == 2 * 2
    assert (summary["p90_abs_err"] >= 0).all()
    assert len(runs) == 2 * 2 * 2 * 2
    np.testing.assert_allclose(
        runs["abs_err"], (runs["j_hat"] - runs["j_true"]).abs(), atol=1e-9
    )


def test_reproduce_traj_sim_figure(tmp_path):
    """One learning curve per agent, including sampled FQI-AIR"""
    cfg = ReproduceConfig.from_toml(_TINY_REPRODUCE)
    paths = reproduce_figure("traj_sim", tmp_path, seed=3, config=cfg)

    assert sorted(p.name for p in paths) == [
        "traj_sim_order_api.csv",
        "traj_sim_order_fqi-air.csv",
        "traj_sim_order_q_learning.csv",
    ]
    for path in paths:
        curve = pd.read_csv(path)
        assert list(curve.columns) == ["iteration", "return_mean", "return_stderr"]
        assert curve["iteration"].tolist() == [1, 2]


def test_reproduce_is_deterministic(tmp_path):
    """Equal seeds give byte-identical files, also across worker counts"""
    cfg = ReproduceConfig.from_toml(_TINY_REPRODUCE)
    first = reproduce_figure("sim_eps0", tmp_path / "a", seed=3, config=cfg)
    second = reproduce_figure(
        "sim_eps0", tmp_path / "b", seed=3, config=cfg, n_workers=2
    )

    assert first[0].read_bytes() == second[0].read_bytes()


def test_reproduce_errors(tmp_path):
    with pytest.raises(UnknownFigureError, match="sim_eps9"):
        reproduce_figure("sim_eps9", tmp_path)
    with pytest.raises(ConfigError):
        reproduce_figure("sim_eps0", tmp_path, scale=0.0)


def test_run_sweep(tmp_path):
    """Every (algorithm, N, run) cell has a replay estimate and a return"""
    out_path = tmp_path / "sweep" / "results.csv"
    out = run_sweep(SweepConfig.from_toml(_TINY_SWEEP), out_path)

    table = pd.read_csv(out)
    assert list(table.columns) == ["algo", "N", "run", "j_hat", "return"]
    assert len(table) == 3 * 2 * 2
    assert set(table["algo"]) == {"fqi-air", "fqi", "mbs"}
    assert (tmp_path / "sweep" / TEST_RUN_LOG_FILENAME).is_file()
