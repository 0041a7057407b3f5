"""Monte Carlo value of a policy in its true environment"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.libs.algos import Policy, mean_and_stderr
from app.libs.core import RngStream
from app.libs.envs import Environment


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    returns: Tuple[float, ...]


def rollout_return(
    policy: Policy,
    env: Environment,
    env_rng: RngStream,
    policy_rng: Optional[RngStream] = None,
) -> float:
    state = env.reset(env_rng)
    total = 0.0
    while not env.done:
        state, reward = env.step(policy.act_state(env.h, state, policy_rng))
        total += reward
    return total


def j_true_mc(
    policy: Policy,
    env: Environment,
    n_rollouts: int = 100,
    rng: Optional[RngStream] = None,
) -> McEstimate:
    """Mean return and its standard error over independent episodes"""
    rng = rng if rng is not None else RngStream(0, "j_true")
    returns = np.array(
        [
            rollout_return(
                policy,
                env,
                rng.child(f"rollout{i}/env"),
                rng.child(f"rollout{i}/policy"),
            )
            for i in range(n_rollouts)
        ]
    )
    mean, stderr = mean_and_stderr(returns)
    return McEstimate(mean=mean, stderr=stderr, returns=tuple(returns.tolist()))
