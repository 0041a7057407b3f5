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
"""Fixed-rule behavior policies of the benchmark environments"""
from enum import Enum
from typing import Dict, Optional

import numpy as np

from app.libs.algos import Policy, register_policy_kind
from app.libs.core import RngStream

from .exc import CollectError, UnknownPolicyError

ORDER_IDLE_PROBABILITY = 0.75
INVENTORY_ORDER_SPREAD = 3

DEFAULT_N_ACTIONS: Dict[str, int] = {"order": 6, "inventory": 11}


class BehaviorKind(str, Enum):
    RANDOM = "random"
    CONSTANT = "constant"


class FixedRulePolicy(Policy):
    """A behavior rule of one environment

    order, random: 0 with probability 0.75, every other action equally likely.
    order, constant: always 0.
    inventory, random: uniform over the integers in [D - 3, D + 3], clamped
    to the action range, where D is the last demand.
    inventory, constant: min(D, largest action), floored.
    tabular, random: uniform; tabular, constant: always 0.
    """

    kind = "fixed"

    def __init__(self, env_id: str, rule: BehaviorKind, n_actions: int):
        self.env_id = env_id
        self.rule = BehaviorKind(rule)
        self.n_actions = n_actions
        self.deterministic = self.rule == BehaviorKind.CONSTANT

    def act(self, h, exo, endo, rng: Optional[RngStream] = None):
        n = len(exo)
        top = self.n_actions - 1
        if self.env_id == "inventory":
            demand = np.asarray(exo, dtype=float)[:, 0]
            if self.rule == BehaviorKind.CONSTANT:
                return np.minimum(np.floor(demand), top).astype(int)
            low = np.ceil(demand - INVENTORY_ORDER_SPREAD).astype(int)
            high = np.floor(demand + INVENTORY_ORDER_SPREAD).astype(int)
            return np.clip(self._rng(rng).integers(low, high + 1), 0, top)

        if self.rule == BehaviorKind.CONSTANT:
            return np.zeros(n, dtype=int)
        if self.env_id == "order" and self.n_actions > 1:
            rest = (1.0 - ORDER_IDLE_PROBABILITY) / top
            p = [ORDER_IDLE_PROBABILITY] + [rest] * top
            return self._rng(rng).choice(self.n_actions, size=n, p=p)
        return self._rng(rng).integers(0, self.n_actions, size=n)

    @staticmethod
    def _rng(rng: Optional[RngStream]) -> RngStream:
        if rng is None:
            raise CollectError("random behavior policies need an rng")
        return rng

    def to_dict(self):
        return {
            "kind": self.kind,
            "env": self.env_id,
            "rule": self.rule.value,
            "n_actions": self.n_actions,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "FixedRulePolicy":
        return cls(data["env"], BehaviorKind(data["rule"]), int(data["n_actions"]))


register_policy_kind(FixedRulePolicy.kind, FixedRulePolicy.from_dict)


def behavior_policy(
    env_id: str, kind: str, n_actions: Optional[int] = None
) -> FixedRulePolicy:
    """The named behavior rule of an environment

    Raises:
        UnknownPolicyError: for unknown kinds or environments
    """
    try:
        rule = BehaviorKind(kind)
    except ValueError:
        raise UnknownPolicyError(f"unknown behavior policy {kind!r}")
    if n_actions is None:
        if env_id not in DEFAULT_N_ACTIONS:
            raise UnknownPolicyError(f"no behavior policies for environment {env_id!r}")
        n_actions = DEFAULT_N_ACTIONS[env_id]
    return FixedRulePolicy(env_id, rule, n_actions)
