# This code is part of fqi-air
#
# (C) Copyright fqi-air contributors 2026
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""Self-contained (cell, run) jobs of the experiment harness

Every job builds its own environment instance, collects its own data and
returns plain result rows, so jobs can run in any worker process and in any
order.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

from app.libs.algos import (
    CurvePoint,
    Policy,
    SampledFqiConfig,
    fqi_air_sampled,
    mean_and_stderr,
    replay_returns,
    traj_sim_online,
)
from app.libs.collect import collect_dataset
from app.libs.core import Dataset, RngStream
from app.libs.envs import Environment
from app.libs.eval import (
    OfflineSelectionContext,
    OnlineSelectionContext,
    SelectionMode,
    j_hat,
    j_true_mc,
    select_hyperparams,
)
from app.libs.models import exact_endo_model

from .dtos import AlgoName, FigureId, ReproduceConfig, SweepConfig, TrainConfig
from .training import build_env, resolve_behavior, spec_for, train_policy

Row = Dict[str, Any]

BEHAVIOR_ROW = "behavior"
SAMPLED_CURVE = "fqi-air"


def derive_seed(rng: RngStream, label: str) -> int:
    """A 31-bit seed drawn from a labelled child of the stream"""
    return int(rng.child(label).integers(0, 2**31 - 1))


@dataclass(frozen=True)
class SimulationJob:
    """One run of one environment under one behavior policy

    Attributes:
        eps_air: the action impact of the environment instance
        seed: the base seed of the harness
    """

    figure: FigureId
    env_id: str
    eps_air: float
    behavior: str
    run: int
    seed: int
    config: ReproduceConfig

    @property
    def label(self) -> str:
        cell = f"{self.figure.value}/{self.env_id}/eps{self.eps_air!r}"
        return f"{cell}/{self.behavior}/run{self.run}"

    @property
    def instance_label(self) -> str:
        """Behaviors of the same run share the environment instance"""
        cell = f"{self.figure.value}/{self.env_id}/eps{self.eps_air!r}"
        return f"{cell}/run{self.run}/instance"


@dataclass(frozen=True)
class TrajSimJob:
    env_id: str
    run: int
    seed: int
    config: ReproduceConfig

    @property
    def label(self) -> str:
        return f"traj_sim/{self.env_id}/run{self.run}"


@dataclass(frozen=True)
class SweepJob:
    run: int
    config: SweepConfig


def _env_and_data(
    job: SimulationJob, n_episodes: int, rng: RngStream
) -> Tuple[Environment, Policy, Dataset]:
    cfg = job.config
    env = build_env(
        job.env_id,
        job.eps_air,
        job.seed,
        horizon=cfg.horizon,
        rng=RngStream(job.seed, job.instance_label),
    )
    behavior = resolve_behavior(
        env,
        job.behavior,
        derive_seed(rng, "collector"),
        cfg.collector_episodes,
        cfg.train_config(job.seed),
    )
    data = collect_dataset(
        env, behavior, n_episodes, derive_seed(rng, "data"), policy_name=job.behavior
    )
    return env, behavior, data


def candidate_configs(
    algo: AlgoName, cfg: ReproduceConfig, seed: int
) -> List[TrainConfig]:
    """The hyperparameter grid searched for an algorithm

    FQI-AIR and FQI search every (optimizer, learning rate) pair, MBS-QI
    also every density threshold; other algorithms use the first entries.
    """
    algo = AlgoName(algo)
    if algo not in (AlgoName.FQI_AIR, AlgoName.FQI, AlgoName.MBS):
        return [cfg.train_config(seed)]
    thresholds = cfg.mbs_thresholds if algo == AlgoName.MBS else [None]
    return [
        cfg.train_config(seed, lr, optimizer, **({} if b is None else {"b": b}))
        for optimizer in cfg.optimizers
        for lr in cfg.learning_rates
        for b in thresholds
    ]


def _train_selected(
    algo: AlgoName,
    d: Dataset,
    env: Environment,
    cfg: ReproduceConfig,
    seed: int,
) -> Policy:
    """Trains with hyperparameters chosen the way each algorithm allows

    FQI-AIR picks its optimizer and learning rate by the replay estimate on
    its own data; FQI and MBS-QI have no offline criterion and are tuned on
    the environment.
    """

    def train(candidate: TrainConfig, data: Dataset) -> Policy:
        return train_policy(algo, data, env, candidate)

    candidates = candidate_configs(algo, cfg, seed)
    if len(candidates) == 1:
        return train(candidates[0], d)

    if algo == AlgoName.FQI_AIR:
        context = OfflineSelectionContext(
            dataset=d,
            endo_model=exact_endo_model(env),
            spec=spec_for(env, candidates[0]),
            train=train,
            seed=seed,
        )
        mode = SelectionMode.OFFLINE_JHAT
    else:
        context = OnlineSelectionContext(
            dataset=d,
            train=train,
            make_env=lambda: env,
            n_rollouts=cfg.eval_rollouts,
            seed=seed,
        )
        mode = SelectionMode.ONLINE_JTRUE
    result = select_hyperparams(candidates, mode, context)
    return train(result.best, d)


def run_simulation_job(job: SimulationJob) -> List[Row]:
    """Returns of the behavior and of every algorithm for each dataset size

    Datasets of every size are prefixes of one collection, so larger
    datasets extend smaller ones.
    """
    cfg = job.config
    rng = RngStream(job.seed, job.label)
    env, behavior, full = _env_and_data(job, max(cfg.n_grid), rng)

    def row(algo: str, n: int, value: float) -> Row:
        return {
            "env": job.env_id,
            "policy": job.behavior,
            "algo": algo,
            "N": n,
            "run": job.run,
            "return": value,
        }

    behavior_return = j_true_mc(
        behavior, env, cfg.eval_rollouts, rng.child("eval/behavior")
    )
    rows = []
    for n in cfg.n_grid:
        d = full.subset(range(n))
        rows.append(row(BEHAVIOR_ROW, n, behavior_return.mean))
        for algo in cfg.algos:
            seed = derive_seed(rng, f"train/{algo.value}/N{n}")
            policy = _train_selected(algo, d, env, cfg, seed)
            estimate = j_true_mc(
                policy, env, cfg.eval_rollouts, rng.child(f"eval/{algo.value}/N{n}")
            )
            rows.append(row(algo.value, n, estimate.mean))
    return rows


def run_eval_error_job(job: SimulationJob) -> List[Row]:
    """Replay estimate and true return of FQI-AIR for each dataset size"""
    cfg = job.config
    rng = RngStream(job.seed, job.label)
    env, _, full = _env_and_data(job, max(cfg.eval_n_grid), rng)
    endo_model = exact_endo_model(env)
    spec = env.air_spec()

    rows = []
    for n in cfg.eval_n_grid:
        d = full.subset(range(n))
        train_cfg = cfg.train_config(derive_seed(rng, f"train/N{n}"))
        policy = train_policy(
            AlgoName.FQI_AIR, d, env, train_cfg, endo_model=endo_model
        )
        estimate = j_hat(policy, d, endo_model, spec, rng.child(f"jhat/N{n}"))
        truth = j_true_mc(policy, env, cfg.eval_rollouts, rng.child(f"jtrue/N{n}"))
        rows.append(
            {
                "env": job.env_id,
                "eps_air": job.eps_air,
                "policy": job.behavior,
                "N": n,
                "run": job.run,
                "j_hat": estimate.j_hat,
                "j_true": truth.mean,
                "abs_err": abs(estimate.j_hat - truth.mean),
            }
        )
    return rows


def _curve_rows(
    env_id: str, agent: str, run: int, curve: Sequence[CurvePoint]
) -> List[Row]:
    return [
        {
            "env": env_id,
            "agent": agent,
            "run": run,
            "iteration": point.iteration,
            "return_mean": point.return_mean,
            "return_stderr": point.return_stderr,
        }
        for point in curve
    ]


def run_traj_sim_job(job: TrajSimJob) -> List[Row]:
    """Learning curves on one random-policy dataset

    Sampled FQI-AIR and the online agents train on the same data and are
    scored after every iteration by replaying their greedy policy on it.
    """
    cfg = job.config
    rng = RngStream(job.seed, job.label)
    env = build_env(
        job.env_id, 0.0, job.seed, horizon=cfg.horizon, rng=rng.child("instance")
    )
    behavior = resolve_behavior(env, "random", job.seed)
    d = collect_dataset(env, behavior, cfg.traj_sim_n, derive_seed(rng, "data"))
    endo_model = exact_endo_model(env)
    spec = env.air_spec()
    fit = cfg.train_config(derive_seed(rng, "train")).fit_config()

    curve: List[CurvePoint] = []
    score_rng = rng.child("score")

    def score(iteration: int, policy: Policy):
        returns = replay_returns(policy, d, endo_model, score_rng.child(f"{iteration}"))
        curve.append(CurvePoint(iteration + 1, *mean_and_stderr(returns)))

    sampled = SampledFqiConfig(
        **fit.model_copy(
            update={"batch_size": min(fit.batch_size, d.n_transitions)}
        ).model_dump(),
        iterations=cfg.traj_sim_iterations,
        updates_per_iteration=cfg.sampled_updates,
    )
    fqi_air_sampled(
        d, endo_model, spec, sampled, cfg.traj_sim_fclass, on_iteration=score
    )
    rows = _curve_rows(job.env_id, SAMPLED_CURVE, job.run, curve)

    for agent in cfg.traj_sim_agents:
        _, agent_curve = traj_sim_online(
            d,
            endo_model,
            agent,
            cfg.traj_sim_iterations,
            fit,
            spec=spec,
            fclass=cfg.traj_sim_fclass,
        )
        rows += _curve_rows(job.env_id, agent.value, job.run, agent_curve)
    return rows


def run_sweep_job(job: SweepJob) -> List[Row]:
    """Trains every algorithm on prefixes of one dataset and scores the policies

    Each row carries the replay estimate and the Monte Carlo return.
    """
    cfg = job.config
    rng = RngStream(cfg.seed, f"sweep/{cfg.env}/run{job.run}")
    env = build_env(
        cfg.env, cfg.eps_air, cfg.seed, horizon=cfg.horizon, rng=rng.child("instance")
    )
    behavior = resolve_behavior(
        env,
        cfg.behavior,
        derive_seed(rng, "collector"),
        cfg.collector_episodes,
        cfg.train,
    )
    full = collect_dataset(
        env,
        behavior,
        max(cfg.n_grid),
        derive_seed(rng, "data"),
        policy_name=cfg.behavior,
    )
    endo_model = exact_endo_model(env)
    spec = spec_for(env, cfg.train)

    rows = []
    for n in cfg.n_grid:
        d = full.subset(range(n))
        for algo in cfg.algos:
            train_cfg = cfg.train.model_copy(
                update={"seed": derive_seed(rng, f"train/{algo.value}/N{n}")}
            )
            policy = train_policy(algo, d, env, train_cfg)
            jhat_rng = rng.child(f"jhat/{algo.value}/N{n}")
            report = j_hat(policy, d, endo_model, spec, jhat_rng)
            truth = j_true_mc(
                policy, env, cfg.eval_rollouts, rng.child(f"jtrue/{algo.value}/N{n}")
            )
            rows.append(
                {
                    "algo": algo.value,
                    "N": n,
                    "run": job.run,
                    "j_hat": report.j_hat,
                    "return": truth.mean,
                }
            )
    return rows
