"""The behavior baseline of a tabular MDP"""
from typing import Optional

import numpy as np

from app.libs.algos import Policy
from app.libs.envs import TabularMdp

from .dp import policy_matrix


def build_baseline_mdp(
    m: TabularMdp, behavior: Policy, endo: Optional[TabularMdp] = None
) -> TabularMdp:
    """An action-independent MDP whose exogenous chain follows the behavior

    The exogenous kernel at every step is the ratio of the behavior's
    exogenous flow x_h -> x_{h+1} to its exogenous marginal at x_h, computed
    exactly by forward propagation of the behavior's occupancy. Exo states
    the behavior never reaches self-loop.

    Args:
        m: the true MDP
        behavior: the behavior policy
        endo: the MDP whose endogenous kernel replaces m's, e.g. a perturbed one

    Returns:
        the baseline MDP, with m's rewards and initial distribution
    """
    probs = policy_matrix(behavior, m).probs
    horizon, nx, n_actions = m.horizon, m.n_exo, m.n_actions
    p_exo = np.zeros((horizon, nx, nx))
    occupancy = m.nu.copy()
    for h in range(horizon):
        weight = occupancy[:, :, None] * probs[h]
        flow = np.einsum("xea,xaX->xX", weight, m.p_exo[h])
        marginal = occupancy.sum(axis=1)
        reached = marginal > 0
        p_exo[h, reached] = flow[reached] / marginal[reached, None]
        p_exo[h, ~reached] = np.eye(nx)[~reached]
        p_exo[h] /= p_exo[h].sum(axis=1, keepdims=True)
        occupancy = np.einsum(
            "xea,xaX,xeaXE->XE", weight, m.p_exo[h], m.p_end[h]
        )

    p_end = m.p_end if endo is None else endo.p_end
    shape = (horizon, nx, n_actions, nx)
    return m.replace(
        p_exo=np.broadcast_to(p_exo[:, :, None, :], shape).copy(),
        p_end=p_end,
    )
