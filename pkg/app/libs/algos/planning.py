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
"""Model-based planning: exact backward induction and model-generated sweeps"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from app.libs.approx import Featurizer, FitConfig, FunctionClass, QFunction, QMode
from app.libs.core import AirSpec, Dataset, RngStream
from app.libs.envs import TabularMdp
from app.libs.models import DynamicsKind, DynamicsModel, EndoModel, ExoKernel

from .exc import AlgorithmError
from .fqi import (
    SyntheticSet,
    _check_inputs,
    _warm_start,
    build_synthetic_set,
    featurizer_for,
)
from .policies import GreedyPolicy, Policy, TabularPolicy

PlanningModel = Union[TabularMdp, ExoKernel, DynamicsModel]


@dataclass(frozen=True)
class DpResult:
    """Exact finite-horizon values of a TabularMdp

    Attributes:
        values: (H+1, nx, ne) state values, zero at step H
        q: (H, nx, ne, A) action values
        policy: the optimal policy, or the evaluated one
        j: the value of the initial distribution
    """

    values: np.ndarray
    q: np.ndarray
    policy: TabularPolicy
    j: float


def backward_induction(
    m: TabularMdp, policy: Optional[TabularPolicy] = None
) -> DpResult:
    """Optimal values, or the values of the given policy, by backward induction"""
    horizon, nx, ne, n_actions = m.horizon, m.n_exo, m.n_endo, m.n_actions
    values = np.zeros((horizon + 1, nx, ne))
    q = np.zeros((horizon, nx, ne, n_actions))
    actions = np.zeros((horizon, nx, ne), dtype=int)
    for h in reversed(range(horizon)):
        inner = np.einsum("xeaXE,XE->xeaX", m.p_end[h], values[h + 1])
        q[h] = np.einsum("xaX,xeaX->xea", m.p_exo[h], m.r[h] + inner)
        if policy is None:
            actions[h] = np.argmax(q[h], axis=-1)
            values[h] = q[h].max(axis=-1)
        else:
            values[h] = (policy.probs[h] * q[h]).sum(axis=-1)

    result_policy = policy or TabularPolicy.from_actions(actions, n_actions)
    j = float((m.nu * values[0]).sum())
    return DpResult(values=values, q=q, policy=result_policy, j=j)


def _expected_set(
    kernel: ExoKernel,
    m: EndoModel,
    spec: AirSpec,
    h: int,
    q_next: QFunction,
    rng: RngStream,
) -> SyntheticSet:
    """Pairs every observed exo value of step h with every swept endo value
    and action, with targets averaged over the empirical successors"""
    sweep = spec.sweep_array()
    n_sweep, n_actions = len(sweep), spec.n_actions
    n_sources = len(kernel.levels[h])
    source, target_state, weight = kernel.successors(h)
    valid = source < n_sources
    source, target_state, weight = source[valid], target_state[valid], weight[valid]

    per_edge = n_sweep * n_actions
    edge = np.repeat(np.arange(len(source)), per_edge)
    endo_index = np.tile(np.repeat(np.arange(n_sweep), n_actions), len(source))
    action = np.tile(np.arange(n_actions), len(source) * n_sweep)

    exo = kernel.padded_levels[h][source[edge]]
    next_exo = kernel.padded_levels[h + 1][target_state[edge]]
    endo = sweep[endo_index]
    last = h == kernel.horizon - 1

    if m.deterministic:
        next_endo, reward = m.step(h, exo, endo, action, next_exo, rng)
        value = np.asarray(reward, dtype=float).copy()
        if not last:
            value += q_next.values(next_exo, next_endo, h + 1).max(axis=1)
    else:
        probs, reward = m.kernel(h, exo, endo, action, next_exo, sweep)
        value = np.asarray(reward, dtype=float).copy()
        if not last:
            columns = []
            for s in range(n_sweep):
                endo_s = np.repeat(sweep[s : s + 1], len(exo), 0)
                columns.append(q_next.values(next_exo, endo_s, h + 1).max(axis=1))
            continuation = np.stack(columns, axis=1)
            value += (probs * continuation).sum(axis=1)

    cell = (source[edge] * n_sweep + endo_index) * n_actions + action
    totals = np.zeros(n_sources * per_edge)
    np.add.at(totals, cell, weight[edge] * value)

    grid = np.arange(n_sources * per_edge)
    state, action_out = np.divmod(grid, n_actions)
    exo_index, endo_out = np.divmod(state, n_sweep)
    return SyntheticSet(
        exo=kernel.levels[h][exo_index],
        endo=sweep[endo_out],
        action=action_out,
        target=totals,
    )


def _new_q(
    fclass: FunctionClass,
    featurizer: Featurizer,
    spec: AirSpec,
    cfg: FitConfig,
    rng: RngStream,
) -> QFunction:
    return QFunction(
        fclass,
        featurizer,
        spec.n_actions,
        QMode.PER_HORIZON,
        rng.child("q"),
        cfg.hidden,
    )


def _fit_step(
    q: QFunction, h: int, pairs: SyntheticSet, cfg: FitConfig, rng: RngStream
):
    _warm_start(q, h)
    q.fit_slot(
        h,
        pairs.exo,
        pairs.endo,
        pairs.action,
        pairs.target,
        cfg,
        rng.child(f"fit/h{h}"),
    )


def _plan_on_kernel(
    kernel: ExoKernel,
    m: EndoModel,
    spec: AirSpec,
    fclass: FunctionClass,
    cfg: FitConfig,
    featurizer: Featurizer,
) -> GreedyPolicy:
    rng = RngStream(cfg.seed, "mb_plan/kernel")
    q = _new_q(fclass, featurizer, spec, cfg, rng)
    for h in reversed(range(kernel.horizon)):
        pairs = _expected_set(kernel, m, spec, h, q, rng.child(f"sweep/h{h}"))
        _fit_step(q, h, pairs, cfg, rng)
    return GreedyPolicy(q)


def _model_set(
    d: Dataset,
    model: DynamicsModel,
    m: Optional[EndoModel],
    spec: AirSpec,
    h: int,
    q_next: QFunction,
    rng: RngStream,
) -> SyntheticSet:
    if model.kind == DynamicsKind.EXO_ONLY:
        next_exo, _, _ = model.predict(d.exo[:, h])
        return build_synthetic_set(d, m, spec, h, q_next, rng, next_exo=next_exo)

    sweep = spec.sweep_array()
    per_episode = len(sweep) * spec.n_actions
    exo = np.repeat(d.exo[:, h], per_episode, axis=0)
    endo = np.tile(np.repeat(sweep, spec.n_actions, axis=0), (len(d), 1))
    action = np.tile(np.arange(spec.n_actions), len(d) * len(sweep))
    next_exo, next_endo, reward = model.predict(exo, endo, action)
    target = reward.copy()
    if h < d.horizon - 1:
        target += q_next.values(next_exo, next_endo, h + 1).max(axis=1)
    return SyntheticSet(exo=exo, endo=endo, action=action, target=target)


def _plan_on_dynamics(
    d: Dataset,
    model: DynamicsModel,
    m: Optional[EndoModel],
    spec: AirSpec,
    fclass: FunctionClass,
    cfg: FitConfig,
    featurizer: Featurizer,
) -> GreedyPolicy:
    if model.kind == DynamicsKind.EXO_ONLY and m is None:
        raise AlgorithmError("planning on an exo-only model needs an endo model")
    _check_inputs(d)
    rng = RngStream(cfg.seed, f"mb_plan/{model.kind.value}")
    q = _new_q(fclass, featurizer, spec, cfg, rng)
    for h in reversed(range(d.horizon)):
        pairs = _model_set(d, model, m, spec, h, q, rng.child(f"sweep/h{h}"))
        _fit_step(q, h, pairs, cfg, rng)
    return GreedyPolicy(q)


def mb_plan(
    model: PlanningModel,
    spec: Optional[AirSpec] = None,
    fclass: FunctionClass = FunctionClass.TABULAR,
    cfg: Optional[FitConfig] = None,
    d: Optional[Dataset] = None,
    endo_model: Optional[EndoModel] = None,
    featurizer: Optional[Featurizer] = None,
) -> Policy:
    """Plans in a model of the environment

    A TabularMdp is solved exactly by backward induction. An empirical
    ExoKernel is planned in by backward fitted Q-iteration whose targets
    average over the empirical successors. A DynamicsModel generates the next
    exogenous value of every stored step in place of the recorded one.

    Args:
        model: the model to plan in
        spec: the regime providing the endogenous sweep
        fclass: the function class of fitted planners
        cfg: the regression settings of fitted planners
        d: the dataset, required for the kernel and dynamics planners
        endo_model: the endogenous model paired with exogenous-only models

    Raises:
        AlgorithmError: if the inputs needed by the model's planner are missing
        ModelNotFittedError: if a learned model has not been fitted
    """
    if isinstance(model, TabularMdp):
        return backward_induction(model).policy

    if spec is None or d is None:
        raise AlgorithmError("planning in a learned model needs a spec and a dataset")
    cfg = cfg or FitConfig()
    featurizer = featurizer or featurizer_for(d)
    if isinstance(model, ExoKernel):
        if endo_model is None:
            raise AlgorithmError("planning on an exo kernel needs an endo model")
        return _plan_on_kernel(model, endo_model, spec, fclass, cfg, featurizer)
    if isinstance(model, DynamicsModel):
        return _plan_on_dynamics(d, model, endo_model, spec, fclass, cfg, featurizer)
    raise AlgorithmError(f"cannot plan in a {type(model).__name__}")
