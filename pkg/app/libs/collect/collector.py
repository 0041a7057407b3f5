"""An online epsilon-greedy Q-learner used as a learned behavior policy"""
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from app.libs.algos import GreedyPolicy
from app.libs.approx import Featurizer, FitConfig, FunctionClass, QFunction, QMode
from app.libs.core import RngStream
from app.libs.envs import Environment
from app.utils.logging import get_logger, progress_disabled

BUFFER_SIZE = 10_000
ANNEAL_EPISODES = 500
START_EPSILON = 1.0
FINAL_EPSILON = 0.05
TARGET_REFRESH_EPISODES = 10
UPDATES_PER_EPISODE = 20

logger = get_logger(__name__)


class ReplayBuffer:
    """A ring buffer of transitions"""

    def __init__(self, capacity: int, exo_dim: int, endo_dim: int):
        self.capacity = capacity
        self.size = 0
        self._next = 0
        self.h = np.zeros(capacity, dtype=int)
        self.exo = np.zeros((capacity, exo_dim))
        self.endo = np.zeros((capacity, endo_dim))
        self.action = np.zeros(capacity, dtype=int)
        self.reward = np.zeros(capacity)
        self.next_exo = np.zeros((capacity, exo_dim))
        self.next_endo = np.zeros((capacity, endo_dim))

    def add(self, h, exo, endo, action, reward, next_exo, next_endo):
        i = self._next
        self.h[i] = h
        self.exo[i], self.endo[i] = exo, endo
        self.action[i], self.reward[i] = action, reward
        self.next_exo[i], self.next_endo[i] = next_exo, next_endo
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)


def epsilon_at(episode: int, anneal_episodes: int = ANNEAL_EPISODES) -> float:
    """Exploration rate, linear from 1.0 to 0.05 over the anneal window"""
    if episode >= anneal_episodes:
        return FINAL_EPSILON
    return START_EPSILON + (FINAL_EPSILON - START_EPSILON) * episode / anneal_episodes


def train_online_collector(
    env: Environment,
    episodes: int = 1000,
    cfg: Optional[FitConfig] = None,
    rng: Optional[RngStream] = None,
    buffer_size: int = BUFFER_SIZE,
    updates_per_episode: int = UPDATES_PER_EPISODE,
) -> Tuple[GreedyPolicy, List[float]]:
    """Online Q-learning with a horizon-aware network, a replay buffer and a
    target network refreshed every 10 episodes

    Returns:
        the final greedy policy and the return of every training episode
    """
    cfg = cfg or FitConfig()
    rng = rng if rng is not None else RngStream(cfg.seed, "collector")
    q = QFunction(
        FunctionClass.MLP,
        Featurizer.for_env(env),
        env.n_actions,
        QMode.SHARED,
        rng.child("q"),
        cfg.hidden,
    )
    target = q.copy()
    buffer = ReplayBuffer(buffer_size, env.exo_dim, env.endo_dim)
    act_rng, batch_rng = rng.child("act"), rng.child("batches")
    curve = []

    for episode in tqdm(range(episodes), disable=progress_disabled()):
        epsilon = epsilon_at(episode)
        state = env.reset(rng.child(f"episode{episode}/env"))
        total = 0.0
        while not env.done:
            h = env.h
            if act_rng.random() < epsilon:
                action = int(act_rng.integers(0, env.n_actions))
            else:
                action = q.greedy(
                    np.array([state.exo]), np.array([state.endo_vector()]), h
                )[0]
            next_state, reward = env.step(int(action))
            buffer.add(
                h,
                state.exo,
                state.endo_vector(),
                action,
                reward,
                next_state.exo,
                next_state.endo_vector(),
            )
            total += reward
            state = next_state
        curve.append(total)

        batch_size = min(cfg.batch_size, buffer.size)
        for _ in range(updates_per_episode):
            rows = batch_rng.choice(buffer.size, size=batch_size, replace=False)
            h = buffer.h[rows]
            values = target.values(buffer.next_exo[rows], buffer.next_endo[rows], h + 1)
            y = buffer.reward[rows] + values.max(axis=1)
            q.slot(0).partial_fit(
                q.features(buffer.exo[rows], buffer.endo[rows], h),
                buffer.action[rows],
                y,
                cfg,
            )
        if (episode + 1) % TARGET_REFRESH_EPISODES == 0:
            target = q.copy()

    if curve:
        logger.info(f"online collector: last episode return {curve[-1]:.4g}")
    return GreedyPolicy(q), curve
