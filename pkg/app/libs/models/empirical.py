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
"""The count-based exogenous model of a dataset and the replay MDP it induces"""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.libs.core import Dataset, EmptyDatasetError
from app.libs.envs import TabularMdp

from .endo import EndoModel
from .exc import ModelError


@dataclass(frozen=True, eq=False)
class ExoKernel:
    """An action-independent exogenous chain estimated from counts

    Exogenous states are indexed per horizon step: the states of step h are
    the distinct values observed at h, padded to a common size nx. States
    never left in the data keep their index at the next step.

    Attributes:
        levels: H+1 arrays of shape (n_h, k), the values of every step
        p_exo: (H, nx, nx) transition probabilities between step indices
        nu: (nx,) empirical distribution of the initial exogenous index
        trajectory_index: (N, L) the index of every recorded exogenous value
    """

    levels: Tuple[np.ndarray, ...]
    p_exo: np.ndarray
    nu: np.ndarray
    trajectory_index: np.ndarray

    @property
    def horizon(self) -> int:
        return self.p_exo.shape[0]

    @property
    def n_states(self) -> int:
        return self.p_exo.shape[1]

    @cached_property
    def padded_levels(self) -> np.ndarray:
        """(H+1, nx, k) values of every step; padding repeats the last value"""
        nx = self.n_states
        return np.stack(
            [
                np.concatenate([v, np.repeat(v[-1:], nx - len(v), axis=0)])
                for v in self.levels
            ]
        )

    @cached_property
    def _lookups(self) -> List[Dict[tuple, int]]:
        return [
            {tuple(row.tolist()): i for i, row in enumerate(values)}
            for values in self.levels
        ]

    def index(self, h: int, exo: np.ndarray) -> np.ndarray:
        """The step-h indices of a batch of exogenous values, -1 when unseen"""
        lookup = self._lookups[h]
        return np.array(
            [lookup.get(tuple(row.tolist()), -1) for row in np.asarray(exo, float)],
            dtype=int,
        )

    def successors(self, h: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source, target, probability) of every positive step-h transition"""
        source, target = np.nonzero(self.p_exo[h])
        return source, target, self.p_exo[h, source, target]

    def to_tabular_mdp(
        self,
        endo_model: EndoModel,
        endo_values: np.ndarray,
        n_actions: int,
        nu: np.ndarray,
        r_max: float,
    ) -> TabularMdp:
        """A dense TabularMdp pairing this chain with an endogenous model

        Args:
            endo_model: answers the endogenous kernel on the grid
            endo_values: (S, m) endogenous grid, closed under the model
            n_actions: the number of actions
            nu: (nx, S) joint initial distribution
            r_max: the bound on the absolute reward

        Returns:
            the (H, nx, S, A) MDP
        """
        horizon, nx = self.horizon, self.n_states
        endo_values = np.asarray(endo_values, dtype=float).reshape(len(endo_values), -1)
        n_endo = len(endo_values)
        x, e, a, x_next = np.meshgrid(
            np.arange(nx), np.arange(n_endo), np.arange(n_actions), np.arange(nx),
            indexing="ij",
        )
        x, e, a, x_next = (v.reshape(-1) for v in (x, e, a, x_next))
        shape = (nx, n_endo, n_actions, nx)

        p_end = np.empty((horizon,) + shape + (n_endo,))
        r = np.empty((horizon,) + shape)
        for h in range(horizon):
            probs, reward = endo_model.kernel(
                h,
                self.padded_levels[h][x],
                endo_values[e],
                a,
                self.padded_levels[h + 1][x_next],
                endo_values,
            )
            p_end[h] = probs.reshape(shape + (n_endo,))
            r[h] = reward.reshape(shape)

        p_exo = np.broadcast_to(
            self.p_exo[:, :, None, :], (horizon, nx, n_actions, nx)
        ).copy()
        return TabularMdp(
            p_exo=p_exo,
            p_end=p_end,
            r=r,
            nu=np.asarray(nu, dtype=float),
            r_max=max(r_max, float(np.abs(r).max())),
        )


def empirical_exo_mdp(d: Dataset, n_exo: Optional[int] = None) -> ExoKernel:
    """Count-ratio estimate of the exogenous chain of a dataset

    P(x_h -> x_{h+1}) = count(x_h -> x_{h+1}) / count(x_h), the same for every
    action. Without recorded final states, transitions out of the last step
    are unseen and self-loop.

    Args:
        d: the dataset
        n_exo: when given, exogenous values are the integer indices 0..n_exo-1
            shared by every step, as in tabular environments

    Returns:
        the estimated chain

    Raises:
        EmptyDatasetError: if the dataset has no episodes
    """
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    horizon = d.horizon
    trajectories = d.exo_trajectories()
    n_episodes, n_levels = trajectories.shape[:2]

    levels: List[np.ndarray] = []
    index = np.zeros((n_episodes, n_levels), dtype=int)
    for h in range(horizon + 1):
        if n_exo is not None:
            levels.append(np.arange(n_exo, dtype=float)[:, None])
            if h < n_levels:
                index[:, h] = trajectories[:, h, 0].astype(int)
            continue
        if h >= n_levels:
            levels.append(levels[-1])
            continue
        values, inverse = np.unique(trajectories[:, h], axis=0, return_inverse=True)
        levels.append(values)
        index[:, h] = inverse.reshape(-1)

    if n_exo is not None and (index.min() < 0 or index.max() >= n_exo):
        raise ModelError(f"exogenous indices fall outside [0, {n_exo})")

    nx = max(len(v) for v in levels)
    counts = np.zeros((horizon, nx, nx))
    for h in range(min(horizon, n_levels - 1)):
        np.add.at(counts[h], (index[:, h], index[:, h + 1]), 1.0)

    totals = counts.sum(axis=2, keepdims=True)
    p_exo = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    unseen_h, unseen_x = np.nonzero(totals[..., 0] == 0)
    p_exo[unseen_h, unseen_x, unseen_x] = 1.0

    nu = np.bincount(index[:, 0], minlength=nx) / n_episodes
    return ExoKernel(
        levels=tuple(levels), p_exo=p_exo, nu=nu, trajectory_index=index
    )


def initial_distribution(
    d: Dataset, kernel: ExoKernel, endo_values: np.ndarray
) -> np.ndarray:
    """(nx, S) empirical joint distribution of the initial (exo, endo) pair

    Raises:
        ModelError: if an initial endogenous value is off the grid
    """
    endo_values = np.asarray(endo_values, dtype=float).reshape(len(endo_values), -1)
    lookup = {tuple(row.tolist()): i for i, row in enumerate(endo_values)}
    nu = np.zeros((kernel.n_states, len(endo_values)))
    for x, endo in zip(kernel.trajectory_index[:, 0], d.endo[:, 0]):
        e = lookup.get(tuple(endo.tolist()))
        if e is None:
            raise ModelError(f"initial endogenous value {endo} is not on the grid")
        nu[x, e] += 1.0
    return nu / len(d)


def build_replay_mdp(
    d: Dataset,
    endo_model: EndoModel,
    endo_values: np.ndarray,
    r_max: Optional[float] = None,
    n_exo: Optional[int] = None,
) -> TabularMdp:
    """The replay MDP of a dataset: the empirical exogenous chain paired with
    an endogenous model

    Exact policy evaluation on this MDP equals the replay estimate of the
    dataset for deterministic endogenous models, provided the dataset holds
    final states or the model does not need the exo value after the last
    action.
    """
    kernel = empirical_exo_mdp(d, n_exo=n_exo)
    nu = initial_distribution(d, kernel, endo_values)
    return kernel.to_tabular_mdp(
        endo_model,
        endo_values,
        d.meta.n_actions,
        nu,
        r_max=0.0 if r_max is None else r_max,
    )
