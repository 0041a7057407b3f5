"""Online control against replayed exogenous trajectories"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from app.libs.approx import Featurizer, FitConfig, FunctionClass, QFunction, QMode
from app.libs.core import AirSpec, Dataset, EmptyDatasetError, RngStream
from app.libs.models import EndoModel
from app.utils.logging import get_logger, progress_disabled

from .dtos import EXPLORATION_EPSILON, AgentKind
from .fqi import featurizer_for
from .policies import GreedyPolicy
from .rollout import replay_returns

logger = get_logger(__name__)


@dataclass(frozen=True)
class CurvePoint:
    iteration: int
    return_mean: float
    return_stderr: float


def mean_and_stderr(returns: np.ndarray) -> Tuple[float, float]:
    returns = np.asarray(returns, dtype=float)
    if len(returns) < 2:
        return float(returns.mean()), 0.0
    return float(returns.mean()), float(returns.std(ddof=1) / np.sqrt(len(returns)))


def _explore(
    q: QFunction,
    h: int,
    exo: np.ndarray,
    endo: np.ndarray,
    epsilon: float,
    rng: RngStream,
) -> np.ndarray:
    actions = q.greedy(exo, endo, h)
    explore = rng.random(len(exo)) < epsilon
    random_actions = rng.integers(0, q.n_actions, size=len(exo))
    return np.where(explore, random_actions, actions)


def traj_sim_online(
    d: Dataset,
    m: EndoModel,
    agent: AgentKind,
    iterations: int,
    cfg: FitConfig,
    spec: Optional[AirSpec] = None,
    fclass: FunctionClass = FunctionClass.TABULAR,
    epsilon: float = EXPLORATION_EPSILON,
    featurizer: Optional[Featurizer] = None,
) -> Tuple[GreedyPolicy, List[CurvePoint]]:
    """Trains an online agent in the simulator made of stored exogenous
    trajectories and an endogenous model

    Every iteration plays one epsilon-greedy episode on each stored
    trajectory, in random order and in parallel across trajectories. The
    q_learning agent bootstraps one-step targets; the api agent regresses
    the Monte Carlo returns of the episodes it played and acts greedily on
    the result. After every iteration the greedy policy is replayed on the
    dataset; without iterations the initial policy is evaluated once.

    Returns:
        the final greedy policy and the learning curve

    Raises:
        EmptyDatasetError: if the dataset has no episodes
    """
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    agent = AgentKind(agent)
    horizon = d.horizon
    n_actions = spec.n_actions if spec is not None else d.meta.n_actions
    rng = RngStream(cfg.seed, f"traj_sim/{agent.value}")
    q = QFunction(
        fclass,
        featurizer or featurizer_for(d),
        n_actions,
        QMode.PER_HORIZON,
        rng.child("q"),
        cfg.hidden,
    )

    def evaluate(iteration: int) -> CurvePoint:
        returns = replay_returns(GreedyPolicy(q), d, m, rng.child(f"eval/{iteration}"))
        return CurvePoint(iteration, *mean_and_stderr(returns))

    if iterations == 0:
        return GreedyPolicy(q), [evaluate(0)]

    curve = []
    for iteration in tqdm(range(iterations), disable=progress_disabled()):
        play = rng.child(f"play/{iteration}")
        order = play.permutation(len(d))
        endo = d.endo[order, 0].copy()
        steps = []
        for h in range(horizon):
            exo = d.exo[order, h]
            next_exo = d.next_exo(h)
            next_exo = None if next_exo is None else next_exo[order]
            if next_exo is None and m.needs_next_exo:
                endo, actions = d.endo[order, h], d.actions[order, h]
                steps.append((exo, endo, actions, d.rewards[order, h], None, endo))
                break
            actions = _explore(q, h, exo, endo, epsilon, play)
            next_endo, rewards = m.step(h, exo, endo, actions, next_exo, play)
            steps.append((exo, endo, actions, rewards, next_exo, next_endo))
            endo = next_endo

        if agent == AgentKind.Q_LEARNING:
            for h, step in enumerate(steps):
                exo, endo, actions, rewards, next_exo, next_endo = step
                target = np.asarray(rewards, dtype=float).copy()
                if h < horizon - 1:
                    target += q.values(next_exo, next_endo, h + 1).max(axis=1)
                q.slot(h).partial_fit(q.features(exo, endo, h), actions, target, cfg)
        else:
            to_go = np.zeros(len(d))
            for h in reversed(range(horizon)):
                exo, endo, actions, rewards, _, _ = steps[h]
                to_go = to_go + rewards
                q.slot(h).partial_fit(q.features(exo, endo, h), actions, to_go, cfg)

        curve.append(evaluate(iteration + 1))
    logger.info(
        f"{agent.value} agent after {iterations} iterations: "
        f"replay return {curve[-1].return_mean:.4g}"
    )
    return GreedyPolicy(q), curve
