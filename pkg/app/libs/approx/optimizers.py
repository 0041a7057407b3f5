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
"""Adam and RMSprop updates on dicts of named parameter arrays"""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .dtos import FitConfig, OptimizerName
from .exc import ContractError, NonFiniteError

Params = Dict[str, np.ndarray]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
RMSPROP_RHO = 0.99
EPSILON = 1e-8


@dataclass(frozen=True)
class OptimizerState:
    """Moment estimates of an optimizer after t steps"""

    t: int = 0
    first: Params = field(default_factory=dict)
    second: Params = field(default_factory=dict)


def optimizer_step(
    params: Params, grads: Params, state: OptimizerState, cfg: FitConfig
) -> Tuple[Params, OptimizerState]:
    """Applies one update without touching the inputs

    Args:
        params: the parameters by name
        grads: the gradients, with the same names and shapes as params
        state: the optimizer state before the update
        cfg: the fit configuration naming the optimizer and learning rate

    Returns:
        the updated parameters and optimizer state

    Raises:
        ContractError: if names or shapes of params and grads differ
        NonFiniteError: if a gradient holds NaN or infinite values
    """
    if params.keys() != grads.keys():
        raise ContractError("params and grads hold different names")
    for name, grad in grads.items():
        if grad.shape != params[name].shape:
            raise ContractError(f"gradient {name} has shape {grad.shape}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"gradient {name} is not finite")

    if cfg.optimizer == OptimizerName.ADAM:
        return _adam(params, grads, state, cfg.learning_rate)
    return _rmsprop(params, grads, state, cfg.learning_rate)


def _adam(
    params: Params, grads: Params, state: OptimizerState, lr: float
) -> Tuple[Params, OptimizerState]:
    t = state.t + 1
    first, second, updated = {}, {}, {}
    for name, grad in grads.items():
        m = state.first.get(name, np.zeros_like(grad))
        v = state.second.get(name, np.zeros_like(grad))
        m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * grad
        v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * grad**2
        m_hat = m / (1 - ADAM_BETA1**t)
        v_hat = v / (1 - ADAM_BETA2**t)
        updated[name] = params[name] - lr * m_hat / (np.sqrt(v_hat) + EPSILON)
        first[name], second[name] = m, v
    return updated, OptimizerState(t=t, first=first, second=second)


def _rmsprop(
    params: Params, grads: Params, state: OptimizerState, lr: float
) -> Tuple[Params, OptimizerState]:
    second, updated = {}, {}
    for name, grad in grads.items():
        v = state.second.get(name, np.zeros_like(grad))
        v = RMSPROP_RHO * v + (1 - RMSPROP_RHO) * grad**2
        updated[name] = params[name] - lr * grad / (np.sqrt(v) + EPSILON)
        second[name] = v
    return updated, OptimizerState(t=state.t + 1, second=second)


class Optimizer:
    """Stateful wrapper around optimizer_step

    Attributes:
        cfg: the fit configuration
        state: the moment estimates so far
    """

    def __init__(self, cfg: FitConfig):
        self.cfg = cfg
        self.state = OptimizerState()

    def step(self, params: Params, grads: Params) -> Params:
        params, self.state = optimizer_step(params, grads, self.state, self.cfg)
        return params
