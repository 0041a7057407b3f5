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
"""Dispatch of algorithm names to the library's training entry points"""
from typing import Optional

from app.libs.algos import (
    AlgorithmError,
    Policy,
    density_estimate,
    fqi_air_sampled,
    fqi_air_sweep,
    fqi_baseline,
    mb_plan,
    mbs_qi,
    traj_sim_online,
)
from app.libs.collect import behavior_policy, train_online_collector
from app.libs.core import AirSpec, Dataset, DatasetMeta, RngStream
from app.libs.envs import Environment, OrderExecEnv, make_env
from app.libs.models import (
    DynamicsKind,
    EndoModel,
    empirical_exo_mdp,
    exact_endo_model,
    fit_dynamics_model,
    fit_endo_model,
)
from app.utils.logging import get_logger

from .dtos import AlgoName, EndoModelKind, TrainConfig

logger = get_logger(__name__)


def instance_rng(seed: int) -> RngStream:
    """The stream drawing the parameters of the environment instance of a seed"""
    return RngStream(seed, "instance")


def build_env(
    env_id: str,
    eps_air: float,
    seed: int,
    horizon: Optional[int] = None,
    rng: Optional[RngStream] = None,
    **kwargs,
) -> Environment:
    if horizon is not None:
        kwargs["horizon"] = horizon
    return make_env(env_id, eps_air, rng=rng or instance_rng(seed), **kwargs)


def env_for_dataset(meta: DatasetMeta) -> Environment:
    """Rebuilds the environment instance a dataset was collected from"""
    kwargs = {"n_actions": meta.n_actions}
    if meta.env == OrderExecEnv.env_id:
        kwargs["window"] = meta.exo_dim
    return build_env(meta.env, meta.eps_air, meta.seed, horizon=meta.H, **kwargs)


def spec_for(env: Environment, cfg: TrainConfig) -> AirSpec:
    """The regime of the environment with the sweep cut at endo_sweep_max"""
    spec = env.air_spec()
    if cfg.endo_sweep_max is None:
        return spec
    sweep = [v for v in spec.endo_sweep if v <= cfg.endo_sweep_max]
    if not sweep:
        raise AlgorithmError(f"no endo value is at most {cfg.endo_sweep_max}")
    return spec.model_copy(update={"endo_sweep": sweep})


def endo_model_for(d: Dataset, env: Environment, cfg: TrainConfig) -> EndoModel:
    if cfg.endo_model == EndoModelKind.LEARNED:
        return fit_endo_model(d, cfg.fit_config(), env)
    return exact_endo_model(env)


def train_policy(
    algo: AlgoName,
    d: Dataset,
    env: Environment,
    cfg: TrainConfig,
    endo_model: Optional[EndoModel] = None,
) -> Policy:
    """Trains a policy with the named algorithm

    Args:
        algo: the algorithm
        d: the training dataset
        env: the environment the data came from, providing the exact
            endogenous model, the regime and the feature scales
        cfg: the training settings
        endo_model: overrides the endogenous model chosen by cfg.endo_model

    Raises:
        AlgorithmError: if the algorithm rejects its inputs
    """
    algo = AlgoName(algo)
    fit = cfg.fit_config()

    if algo == AlgoName.FQI:
        return fqi_baseline(d, cfg.fclass, fit, iterations=cfg.iterations)
    if algo == AlgoName.MBS:
        density = density_estimate(d, cfg.bins)
        return mbs_qi(
            d, density, cfg.b, cfg.fclass, fit, iterations=cfg.iterations
        )

    spec = spec_for(env, cfg)
    if algo == AlgoName.MB_FULL:
        dynamics = fit_dynamics_model(d, DynamicsKind.FULL, fit, env)
        return mb_plan(dynamics, spec, cfg.fclass, fit, d=d)

    m = endo_model if endo_model is not None else endo_model_for(d, env, cfg)
    if algo == AlgoName.FQI_AIR:
        return fqi_air_sweep(
            d, m, spec, cfg.fclass, fit, iterations=cfg.iterations
        )
    if algo == AlgoName.FQI_AIR_SAMPLED:
        return fqi_air_sampled(d, m, spec, cfg.sampled_config(), cfg.fclass)
    if algo == AlgoName.MB_EMPIRICAL:
        return mb_plan(empirical_exo_mdp(d), spec, cfg.fclass, fit, d=d, endo_model=m)
    if algo == AlgoName.MB_EXO:
        dynamics = fit_dynamics_model(d, DynamicsKind.EXO_ONLY, fit, env)
        return mb_plan(dynamics, spec, cfg.fclass, fit, d=d, endo_model=m)

    policy, curve = traj_sim_online(
        d, m, cfg.agent, cfg.iterations, fit, spec=spec, fclass=cfg.fclass
    )
    logger.info(f"traj-sim curve has {len(curve)} points")
    return policy


LEARNED_BEHAVIOR = "learned"


def resolve_behavior(
    env: Environment,
    name: str,
    seed: int,
    collector_episodes: int = 1000,
    cfg: Optional[TrainConfig] = None,
) -> Policy:
    """A fixed behavior rule, or the greedy policy of an online-trained collector

    Raises:
        UnknownPolicyError: for names that are neither "learned" nor a rule
    """
    if name != LEARNED_BEHAVIOR:
        return behavior_policy(env.env_id, name, env.n_actions)
    fit = (cfg or TrainConfig(seed=seed)).fit_config().model_copy(update={"seed": seed})
    policy, _ = train_online_collector(
        env, collector_episodes, fit, rng=RngStream(seed, "collector")
    )
    return policy
