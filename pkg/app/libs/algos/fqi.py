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
"""Fitted Q-iteration with and without endogenous sweeps"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from app.libs.approx import Featurizer, FitConfig, FunctionClass, QFunction, QMode
from app.libs.core import (
    AirSpec,
    Dataset,
    EmptyDatasetError,
    RngStream,
    validate_dataset,
)
from app.libs.models import EndoModel
from app.utils.logging import get_logger

from .dtos import SampledFqiConfig
from .exc import AlgorithmError, BatchTooLargeError
from .policies import GreedyPolicy

logger = get_logger(__name__)

BootstrapValues = Callable[[QFunction, int, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SyntheticSet:
    """Regression pairs of one horizon step: ((exo, endo, action), target)"""

    exo: np.ndarray
    endo: np.ndarray
    action: np.ndarray
    target: np.ndarray

    def __len__(self):
        return len(self.target)


def featurizer_for(d: Dataset) -> Featurizer:
    return Featurizer.for_env_id(d.meta.env, d.horizon, exo_dim=d.meta.exo_dim)


def _check_inputs(d: Dataset, spec: Optional[AirSpec] = None):
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    if spec is None:
        return
    violations = validate_dataset(d, spec)
    if violations:
        raise AlgorithmError(f"invalid dataset: {violations[0]}")


def recorded_set(d: Dataset, h: int) -> SyntheticSet:
    """The recorded (exo, endo, action) of step h with the recorded rewards"""
    return SyntheticSet(
        exo=d.exo[:, h],
        endo=d.endo[:, h],
        action=d.actions[:, h],
        target=np.asarray(d.rewards[:, h], dtype=float).copy(),
    )


def build_synthetic_set(
    d: Dataset,
    m: EndoModel,
    spec: AirSpec,
    h: int,
    q_next: Optional[QFunction],
    rng: Optional[RngStream] = None,
    next_exo: Optional[np.ndarray] = None,
) -> SyntheticSet:
    """Pairs every stored exo value of step h with every swept endo value and
    every action

    Args:
        d: the dataset
        m: the endogenous model producing the next endo value and the reward
        spec: the regime providing the endogenous sweep
        h: the horizon step
        q_next: the values of step h+1, unused at the last step
        rng: the stream of stochastic endogenous models
        next_exo: (N, k) next exogenous values replacing the recorded ones

    Returns:
        N * |endo_sweep| * |A| pairs, or the N recorded pairs of the last
        step when the model needs exo values the dataset does not hold
    """
    successors = d.next_exo(h) if next_exo is None else next_exo
    if successors is None and m.needs_next_exo:
        return recorded_set(d, h)

    sweep = spec.sweep_array()
    n_sweep, n_actions = len(sweep), spec.n_actions
    per_episode = n_sweep * n_actions

    exo = np.repeat(d.exo[:, h], per_episode, axis=0)
    endo = np.tile(np.repeat(sweep, n_actions, axis=0), (len(d), 1))
    action = np.tile(np.arange(n_actions), len(d) * n_sweep)
    if successors is not None:
        successors = np.repeat(successors, per_episode, axis=0)

    next_endo, target = m.step(h, exo, endo, action, successors, rng)
    target = np.asarray(target, dtype=float).copy()
    if h < d.horizon - 1:
        target += q_next.values(successors, next_endo, h + 1).max(axis=1)
    return SyntheticSet(exo=exo, endo=endo, action=action, target=target)


def _warm_start(q: QFunction, h: int):
    if q.fclass == FunctionClass.MLP and h < q.horizon - 1:
        q.set_slot(h, q.slot(h + 1).copy())


def outer_passes(fclass: FunctionClass, iterations: int) -> int:
    """The number of backward passes: iterations for neural slots, else 1

    Tabular and linear slots are fitted exactly, so a second pass over the
    same targets changes nothing.

    Raises:
        AlgorithmError: if iterations is below 1
    """
    if iterations < 1:
        raise AlgorithmError(f"iterations must be at least 1, got {iterations}")
    return iterations if FunctionClass(fclass) == FunctionClass.MLP else 1


def _pass_label(p: int, h: int) -> str:
    return f"h{h}" if p == 0 else f"pass{p}/h{h}"


def fqi_air_sweep(
    d: Dataset,
    m: EndoModel,
    spec: AirSpec,
    fclass: FunctionClass,
    cfg: FitConfig,
    featurizer: Optional[Featurizer] = None,
    iterations: int = 1,
) -> GreedyPolicy:
    """Backward fitted Q-iteration on synthetic pairs sweeping the endo values

    Each pass fits q_h on N * |endo_sweep| * |A| pairs built from the stored
    exogenous values of step h. Neural slots make `iterations` backward
    passes, continuing from their weights; on the first pass they start
    from the weights of q_{h+1}.

    Raises:
        EmptyDatasetError: if the dataset has no episodes
        AlgorithmError: if the dataset breaks the regime's invariants or
            iterations is below 1
    """
    _check_inputs(d, spec)
    passes = outer_passes(fclass, iterations)
    rng = RngStream(cfg.seed, "fqi_air")
    q = QFunction(
        fclass,
        featurizer or featurizer_for(d),
        spec.n_actions,
        mode=QMode.PER_HORIZON,
        rng=rng.child("q"),
        hidden=cfg.hidden,
    )
    for p in range(passes):
        for h in reversed(range(d.horizon)):
            label = _pass_label(p, h)
            pairs = build_synthetic_set(d, m, spec, h, q, rng.child(f"sweep/{label}"))
            if p == 0:
                _warm_start(q, h)
            q.fit_slot(
                h,
                pairs.exo,
                pairs.endo,
                pairs.action,
                pairs.target,
                cfg,
                rng.child(f"fit/{label}"),
            )
    logger.info(
        f"fqi-air sweep fitted {d.horizon} steps on {len(d)} episodes "
        f"in {passes} passes"
    )
    return GreedyPolicy(q)


def fqi_air_sampled(
    d: Dataset,
    m: EndoModel,
    spec: AirSpec,
    cfg: SampledFqiConfig,
    fclass: FunctionClass = FunctionClass.MLP,
    featurizer: Optional[Featurizer] = None,
    on_iteration: Optional[Callable[[int, GreedyPolicy], None]] = None,
) -> GreedyPolicy:
    """Fitted Q-iteration of a single horizon-aware QFunction on mini-batches

    Every update samples batch_size recorded transitions and gives each a
    random swept endo value and a random action; targets bootstrap from a
    frozen copy refreshed after each of the cfg.iterations outer iterations.

    Args:
        on_iteration: called with the iteration index and the current greedy
            policy after every outer iteration

    Raises:
        BatchTooLargeError: if batch_size exceeds the recorded transitions
    """
    _check_inputs(d, spec)
    t = d.transitions
    if cfg.batch_size > len(t):
        raise BatchTooLargeError(
            f"batch size {cfg.batch_size} exceeds {len(t)} recorded transitions"
        )

    rng = RngStream(cfg.seed, "fqi_air_sampled")
    draw = rng.child("batches")
    q = QFunction(
        fclass,
        featurizer or featurizer_for(d),
        spec.n_actions,
        mode=QMode.SHARED,
        rng=rng.child("q"),
        hidden=cfg.hidden,
    )
    frozen = q.copy()
    sweep = spec.sweep_array()
    horizon = d.horizon

    for iteration in range(cfg.iterations):
        for _ in range(cfg.updates_per_iteration):
            rows = draw.choice(len(t), size=cfg.batch_size, replace=False)
            endo = sweep[draw.integers(0, len(sweep), size=cfg.batch_size)]
            action = draw.integers(0, spec.n_actions, size=cfg.batch_size)
            h, exo = t.h[rows], t.exo[rows]
            has_next = t.has_next[rows]

            next_endo = np.zeros_like(endo)
            target = np.zeros(cfg.batch_size)
            last = ~has_next
            if m.needs_next_exo and np.any(last):
                endo[last] = t.endo[rows][last]
                action[last] = t.action[rows][last]
                target[last] = t.reward[rows][last]
                last = np.zeros_like(last)
            for known, successors in ((has_next, t.next_exo[rows]), (last, None)):
                if not np.any(known):
                    continue
                next_endo[known], target[known] = m.step(
                    h[known],
                    exo[known],
                    endo[known],
                    action[known],
                    None if successors is None else successors[known],
                    draw,
                )

            inner = h < horizon - 1
            if np.any(inner):
                target[inner] += frozen.values(
                    t.next_exo[rows][inner], next_endo[inner], h[inner] + 1
                ).max(axis=1)
            q.slot(0).partial_fit(q.features(exo, endo, h), action, target, cfg)

        frozen = q.copy()
        if on_iteration is not None:
            on_iteration(iteration, GreedyPolicy(frozen))
    return GreedyPolicy(q)


def fitted_q(
    d: Dataset,
    fclass: FunctionClass,
    cfg: FitConfig,
    featurizer: Optional[Featurizer] = None,
    bootstrap: Optional[BootstrapValues] = None,
    iterations: int = 1,
) -> QFunction:
    """Backward fitted Q-iteration on the recorded transitions only

    Args:
        bootstrap: (q, h, exo, endo) -> (n, A) values replacing q_h in targets
        iterations: backward passes of neural slots, see outer_passes

    Raises:
        EmptyDatasetError: if the dataset has no episodes
        AlgorithmError: if iterations is below 1
    """
    _check_inputs(d)
    passes = outer_passes(fclass, iterations)
    rng = RngStream(cfg.seed, "fqi")
    q = QFunction(
        fclass,
        featurizer or featurizer_for(d),
        d.meta.n_actions,
        mode=QMode.PER_HORIZON,
        rng=rng.child("q"),
        hidden=cfg.hidden,
    )
    for p in range(passes):
        for h in reversed(range(d.horizon)):
            target = d.rewards[:, h].copy()
            if h < d.horizon - 1:
                next_exo, next_endo = d.exo[:, h + 1], d.endo[:, h + 1]
                if bootstrap is None:
                    values = q.values(next_exo, next_endo, h + 1)
                else:
                    values = bootstrap(q, h + 1, next_exo, next_endo)
                target += values.max(axis=1)
            if p == 0:
                _warm_start(q, h)
            q.fit_slot(
                h,
                d.exo[:, h],
                d.endo[:, h],
                d.actions[:, h],
                target,
                cfg,
                rng.child(f"fit/{_pass_label(p, h)}"),
            )
    return q


def fqi_baseline(
    d: Dataset,
    fclass: FunctionClass,
    cfg: FitConfig,
    featurizer: Optional[Featurizer] = None,
    iterations: int = 1,
) -> GreedyPolicy:
    """Classic fitted Q-iteration: targets r_h + max_a q_{h+1}(s_{h+1}, a)"""
    return GreedyPolicy(fitted_q(d, fclass, cfg, featurizer, iterations=iterations))
