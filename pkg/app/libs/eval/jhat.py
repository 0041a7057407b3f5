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
"""The replay estimate of a policy's value"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

import settings
from app.libs.algos import Policy, replay_returns
from app.libs.core import AirSpec, Dataset, EmptyDatasetError, RngStream, split_dataset
from app.libs.models import EndoModel

from .bounds import eval_bound_thm2

HELDOUT_FRACTION = 0.5


@dataclass(frozen=True)
class EvalReport:
    """The replay estimate with its confidence radius

    Attributes:
        j_hat: the mean of the per-trajectory returns
        n_traj: the number of replayed trajectories
        zeta: the failure probability of the radius
        bound: the radius holding with probability at least 1 - zeta
        returns: the per-trajectory returns
        seed: the base seed of the evaluation stream
    """

    j_hat: float
    n_traj: int
    zeta: float
    bound: float
    returns: Tuple[float, ...]
    seed: int

    def to_row(self) -> Dict[str, Any]:
        return {
            "n": self.n_traj,
            "j_hat": self.j_hat,
            "bound": self.bound,
            "zeta": self.zeta,
            "seed": self.seed,
        }


def unbiased_split(d: Dataset, rng: RngStream) -> Tuple[Dataset, Dataset]:
    """The (training, evaluation) halves used by unbiased replay estimates"""
    return split_dataset(d, HELDOUT_FRACTION, rng.child("split"))


def j_hat(
    policy: Policy,
    d: Dataset,
    m: EndoModel,
    spec: AirSpec,
    rng: RngStream,
    zeta: float = settings.DEFAULT_ZETA,
    unbiased: bool = False,
) -> EvalReport:
    """Replays the policy on every stored exogenous trajectory

    With unbiased set, only the evaluation half of unbiased_split is
    replayed, so a policy trained on the other half is scored on data it
    has not seen.

    Raises:
        EmptyDatasetError: if there is nothing to replay
        BoundParameterError: if zeta is outside (0, 1)
    """
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    if unbiased:
        _, d = unbiased_split(d, rng)
        if len(d) == 0:
            raise EmptyDatasetError("the evaluation half is empty")

    returns = replay_returns(policy, d, m, rng.child("replay"))
    return EvalReport(
        j_hat=float(np.mean(returns)),
        n_traj=len(d),
        zeta=zeta,
        bound=eval_bound_thm2(len(d), zeta, spec),
        returns=tuple(float(r) for r in returns),
        seed=rng.base_seed,
    )
