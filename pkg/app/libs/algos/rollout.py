"""Rolling policies out against stored exogenous trajectories"""
from typing import Optional

import numpy as np

from app.libs.core import Dataset, EmptyDatasetError, RngStream
from app.libs.models import EndoModel

from .policies import Policy


def replay_returns(
    policy: Policy, d: Dataset, m: EndoModel, rng: Optional[RngStream] = None
) -> np.ndarray:
    """Returns of the policy replayed on every stored exogenous trajectory

    Each episode starts from its recorded initial endogenous value; actions
    come from the policy and endogenous transitions from the model while the
    exogenous values are read from the dataset. When the model needs the exo
    value after the last action and the dataset does not hold it, the last
    step adds the recorded reward.

    Args:
        policy: the policy to replay
        d: the dataset providing exogenous trajectories
        m: the endogenous and reward model
        rng: the stream for stochastic policies and models

    Returns:
        (N,) per-trajectory returns

    Raises:
        EmptyDatasetError: if the dataset has no episodes
    """
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    rng = rng if rng is not None else RngStream(d.meta.seed, "replay")
    policy_rng, endo_rng = rng.child("policy"), rng.child("endo")

    endo = d.endo[:, 0].copy()
    returns = np.zeros(len(d))
    for h in range(d.horizon):
        next_exo = d.next_exo(h)
        if next_exo is None and m.needs_next_exo:
            returns += d.rewards[:, h]
            break
        exo = d.exo[:, h]
        actions = policy.act(h, exo, endo, policy_rng)
        endo, rewards = m.step(h, exo, endo, actions, next_exo, endo_rng)
        returns += rewards
    return returns
