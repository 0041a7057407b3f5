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
"""Inventory management with a per-episode demand mean"""
from typing import Optional, Tuple

import numpy as np

from app.libs.core import EndoKind, FactoredState, RngStream

from .base import Environment, HorizonIndex
from .exc import EnvError


class InventoryEnv(Environment):
    """Ordering stock against a normally distributed demand

    The exogenous state is the previous demand and the endogenous state the
    inventory level, kept real valued. Every positive order moves the demand
    mean down or up by 10% with probability eps_air / 2 each, for the rest of
    the episode.

    Attributes:
        order_cost: the cost per ordered unit
        holding_cost: the cost per unit left in stock
        lost_sale_cost: the cost per unit of unmet demand
        reward_floor: the lowest reward, applied as a clip
        mean_range: the range the demand mean is drawn from at reset
    """

    env_id = "inventory"
    exo_dim = 1
    endo_dim = 1
    endo_kind = EndoKind.REAL
    needs_next_exo = True
    reward_range = (-100.0, 0.0)
    exo_scale = (0.1,)
    endo_scale = (1.0 / 15.0,)
    endo_bounds = (0.0, None)

    def __init__(
        self,
        eps_air: float = 0.0,
        rng: Optional[RngStream] = None,
        horizon: int = 100,
        n_actions: int = 11,
        order_cost: float = 0.1,
        holding_cost: float = 0.25,
        lost_sale_cost: float = 1.0,
        reward_floor: float = -100.0,
        mean_range: Tuple[float, float] = (3.0, 9.0),
    ):
        super().__init__(horizon=horizon, n_actions=n_actions, eps_air=eps_air)
        self.order_cost = order_cost
        self.holding_cost = holding_cost
        self.lost_sale_cost = lost_sale_cost
        self.reward_floor = reward_floor
        self.reward_range = (reward_floor, 0.0)
        self.mean_range = mean_range
        self.demand_mean = float(np.mean(mean_range))

    def endo_sweep(self):
        return [float(v) for v in range(16)]

    def _reset(self, rng: RngStream) -> FactoredState:
        self.demand_mean = float(rng.uniform(*self.mean_range))
        previous_demand = self._draw_demand(rng)
        return FactoredState(exo=(previous_demand,), endo=(0.0,), kind=self.endo_kind)

    def _draw_demand(self, rng: RngStream) -> float:
        return max(0.0, float(rng.normal(self.demand_mean, self.demand_mean / 3.0)))

    def transition(
        self, state: FactoredState, action: int, rng: RngStream
    ) -> Tuple[FactoredState, float]:
        demand = self._draw_demand(rng)

        # drawn on every step, see OrderExecEnv.arma_exo_step
        u = rng.random()
        if action > 0:
            if u < self.eps_air / 2:
                self.demand_mean *= 0.9
            elif u < self.eps_air:
                self.demand_mean *= 1.1

        next_endo, reward = self.endo_transition(
            self._h,
            np.array([state.exo]),
            np.array([state.endo_vector()]),
            np.array([action]),
            np.array([[demand]]),
        )
        next_state = FactoredState(
            exo=(demand,), endo=(float(next_endo[0, 0]),), kind=self.endo_kind
        )
        return next_state, float(reward[0])

    def endo_transition(
        self,
        h: HorizonIndex,
        exo: np.ndarray,
        endo: np.ndarray,
        action: np.ndarray,
        next_exo: Optional[np.ndarray],
        rng: Optional[RngStream] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        if next_exo is None:
            raise EnvError("the inventory reward needs the next demand")
        stock = np.asarray(endo, dtype=float)[:, 0]
        order = np.asarray(action, dtype=float)
        demand = np.asarray(next_exo, dtype=float)[:, 0]

        overstock = np.maximum(stock + order - demand, 0.0)
        shortfall = np.maximum(demand - stock - order, 0.0)
        cost = (
            self.order_cost * order
            + self.holding_cost * overstock
            + self.lost_sale_cost * shortfall
        )
        reward = np.maximum(self.reward_floor, -cost)
        return overstock[:, None], reward
