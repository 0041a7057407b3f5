"""Exact dynamic programming on tabular MDPs"""
from typing import Optional

import numpy as np

from app.libs.algos import DpResult, Policy, TabularPolicy, backward_induction
from app.libs.core import RngStream
from app.libs.envs import InvalidMdpError, TabularMdp


def policy_matrix(
    policy: Policy,
    m: TabularMdp,
    exo_values: Optional[np.ndarray] = None,
    endo_values: Optional[np.ndarray] = None,
    rng: Optional[RngStream] = None,
) -> TabularPolicy:
    """The action table of a policy over the states of a TabularMdp

    Args:
        policy: the policy
        m: the MDP defining the state and action spaces
        exo_values: (H+1, nx, k) exogenous value of every exo index per step;
            by default the index itself
        endo_values: (ne, m) endogenous value of every endo index; by default
            the index itself
        rng: the stream of stochastic policies
    """
    if isinstance(policy, TabularPolicy):
        return policy
    horizon, nx, ne, n_actions = m.horizon, m.n_exo, m.n_endo, m.n_actions
    if exo_values is None:
        exo_values = np.broadcast_to(
            np.arange(nx, dtype=float)[None, :, None], (horizon + 1, nx, 1)
        )
    if endo_values is None:
        endo_values = np.arange(ne, dtype=float)[:, None]
    endo_values = np.asarray(endo_values, dtype=float).reshape(ne, -1)

    x, e = np.meshgrid(np.arange(nx), np.arange(ne), indexing="ij")
    x, e = x.reshape(-1), e.reshape(-1)
    actions = np.zeros((horizon, nx, ne), dtype=int)
    for h in range(horizon):
        chosen = policy.act(h, exo_values[h][x], endo_values[e], rng)
        actions[h] = np.asarray(chosen).reshape(nx, ne)
    return TabularPolicy.from_actions(actions, n_actions)


def dp_solve(m: TabularMdp, policy: Optional[Policy] = None, **kwargs) -> DpResult:
    """Exact backward induction

    Without a policy, returns the optimal values and a greedy optimal policy;
    with one, returns its values and J(policy, m). Keyword arguments are
    passed to policy_matrix.

    Raises:
        InvalidMdpError: if the MDP breaks normalization or shapes
    """
    m.validate()
    if policy is None:
        return backward_induction(m)
    return backward_induction(m, policy_matrix(policy, m, **kwargs))


def max_row_l1_gap(m1: TabularMdp, m2: TabularMdp) -> float:
    """Largest l1 distance between the joint next-state rows of two MDPs"""
    if m1.p_end.shape != m2.p_end.shape:
        raise InvalidMdpError("MDPs have different shapes")
    gaps = [
        np.abs(m1.joint_kernel(h) - m2.joint_kernel(h)).sum(axis=(-2, -1)).max()
        for h in range(m1.horizon)
    ]
    return float(max(gaps))
