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
"""Operations on whole datasets"""
import math
from typing import List, Optional, Tuple

import numpy as np

from .dtos import AirSpec, Dataset, EndoKind, FactoredState
from .exc import DatasetError, EmptyDatasetError
from .rng import RngStream


def validate_dataset(
    d: Dataset,
    spec: AirSpec,
    reward_range: Optional[Tuple[float, float]] = None,
) -> List[str]:
    """Lists every way the dataset breaks its invariants

    Args:
        d: the dataset
        spec: the regime parameters the dataset is meant for
        reward_range: the declared reward range of the environment;
            defaults to [-r_max, r_max]

    Returns:
        human-readable violations; empty when the dataset is well formed
    """
    low, high = reward_range or (-spec.r_max, spec.r_max)
    meta = d.meta
    violations = []

    if meta.H != spec.horizon:
        violations.append(f"meta: H {meta.H} ≠ {spec.horizon}")
    if meta.n_actions != spec.n_actions:
        violations.append(f"meta: n_actions {meta.n_actions} ≠ {spec.n_actions}")

    for i, episode in enumerate(d.episodes):
        if len(episode) != spec.horizon:
            violations.append(f"episode {i}: length {len(episode)} ≠ {spec.horizon}")

        for h, step in enumerate(episode.steps):
            prefix = f"episode {i} step {h}"
            violations.extend(
                f"{prefix}: {problem}" for problem in _state_problems(step.state, meta)
            )
            if not 0 <= step.action < spec.n_actions:
                violations.append(f"{prefix}: action out of range")
            if not (math.isfinite(step.reward) and low <= step.reward <= high):
                violations.append(f"{prefix}: reward {step.reward} out of range")

        if episode.final_state is not None:
            violations.extend(
                f"episode {i} final state: {problem}"
                for problem in _state_problems(episode.final_state, meta)
            )

    return violations


def _state_problems(state: FactoredState, meta) -> List[str]:
    problems = []
    if len(state.exo) != meta.exo_dim:
        problems.append(f"exo length {len(state.exo)} ≠ {meta.exo_dim}")
    if state.kind != meta.endo_kind:
        problems.append(f"endo kind {state.kind.value} ≠ {meta.endo_kind.value}")
    elif state.kind == EndoKind.INT and state.endo < 0:
        problems.append("negative endo")
    if len(state.endo_vector()) != meta.endo_dim:
        problems.append(f"endo length {len(state.endo_vector())} ≠ {meta.endo_dim}")
    return problems


def split_dataset(
    d: Dataset, fraction: float, rng: RngStream
) -> Tuple[Dataset, Dataset]:
    """Partitions the episodes into two datasets without replacement

    The first part holds floor(fraction * N + 1/2) episodes; both parts keep
    the original episode order.

    Args:
        d: the dataset to split
        fraction: the share of episodes going into the first part, in (0, 1)
        rng: the stream deciding the partition

    Returns:
        the two parts

    Raises:
        EmptyDatasetError: if the dataset has no episodes
        DatasetError: if fraction is outside (0, 1)
    """
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    if not 0.0 < fraction < 1.0:
        raise DatasetError(f"fraction must lie in (0, 1), got {fraction}")

    n_first = math.floor(fraction * len(d) + 0.5)
    order = rng.permutation(len(d))
    first = np.sort(order[:n_first])
    second = np.sort(order[n_first:])
    return d.subset(first), d.subset(second)
