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
"""Rolling behavior policies out into datasets"""
import multiprocessing
from typing import Optional

from app.libs.algos import Policy
from app.libs.core import Dataset, DatasetMeta, Episode, EpisodeStep, RngStream
from app.libs.envs import Environment

from .exc import CollectError


def collect_episode(env: Environment, policy: Policy, seed: int, index: int) -> Episode:
    """One full episode on the streams collect/episode{index}/env and .../policy"""
    env_rng = RngStream(seed, f"collect/episode{index}/env")
    policy_rng = RngStream(seed, f"collect/episode{index}/policy")
    state = env.reset(env_rng)
    steps = []
    while not env.done:
        action = policy.act_state(env.h, state, policy_rng)
        next_state, reward = env.step(action)
        steps.append(EpisodeStep(state=state, action=action, reward=float(reward)))
        state = next_state
    return Episode(steps=tuple(steps), final_state=state)


def collect_dataset(
    env: Environment,
    policy: Policy,
    n_episodes: int,
    seed: int,
    n_workers: int = 1,
    policy_name: Optional[str] = None,
    final_state: bool = True,
) -> Dataset:
    """Rolls the policy out for n_episodes full episodes

    Episodes depend only on (seed, index), so the result is the same for any
    number of workers. Unless final_state is off, the state after the last
    action is recorded as the episode's final state.

    Args:
        env: the environment; workers receive copies
        policy: the behavior policy
        n_episodes: the number of episodes, at least 1
        seed: the base seed of every episode stream
        n_workers: the number of worker processes
        policy_name: the behavior name stored in the metadata
        final_state: whether to keep the state after the last action

    Raises:
        CollectError: if n_episodes or n_workers is below 1
    """
    if n_episodes < 1:
        raise CollectError(f"n_episodes must be at least 1, got {n_episodes}")
    if n_workers < 1:
        raise CollectError(f"n_workers must be at least 1, got {n_workers}")

    tasks = [(env, policy, seed, i) for i in range(n_episodes)]
    if n_workers == 1:
        episodes = [collect_episode(*task) for task in tasks]
    else:
        with multiprocessing.Pool(processes=n_workers) as pool:
            episodes = pool.starmap(collect_episode, tasks)

    meta = DatasetMeta(
        env=env.env_id,
        policy=policy_name or policy.kind,
        eps_air=env.eps_air,
        seed=seed,
        H=env.horizon,
        n_actions=env.n_actions,
        exo_dim=env.exo_dim,
        endo_kind=env.endo_kind,
        endo_dim=env.endo_dim,
    )
    d = Dataset(episodes=tuple(episodes), meta=meta)
    return d if final_state else d.without_final_states()
