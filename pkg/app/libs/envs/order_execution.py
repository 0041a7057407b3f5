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
"""Selling a block of shares against an ARMA(2,2) price process"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.libs.core import EndoKind, FactoredState, RngStream

from .base import Environment, HorizonIndex
from .exc import EnvError

BURN_IN_STEPS = 20
IMPACT_FACTOR = 0.9
PRICE_SCALE = 20.0


@dataclass(frozen=True)
class ArmaParams:
    """Coefficients of the latent ARMA(2,2) price process"""

    phi1: float
    phi2: float
    theta1: float
    theta2: float
    c: float = 0.0
    sigma: float = 1.0

    @classmethod
    def draw(cls, rng: RngStream) -> "ArmaParams":
        """Draws coefficients in the documented ranges, keeping the AR part stationary

        With phi1 < 0 < phi2 the only stationarity condition that can fail
        is phi2 - phi1 < 1, so draws breaking it are rejected.
        """
        while True:
            phi1 = rng.uniform(-0.9, 0.0)
            phi2 = rng.uniform(0.0, 0.9)
            theta1, theta2 = rng.uniform(-0.5, 0.5, size=2)
            if phi2 - phi1 < 1.0:
                return cls(
                    phi1=float(phi1),
                    phi2=float(phi2),
                    theta1=float(theta1),
                    theta2=float(theta2),
                )


class OrderExecEnv(Environment):
    """Optimal order execution

    The exogenous state is the window of the last K published prices and the
    endogenous state the number of shares left. Selling a positive number of
    shares drops the price by 10% with probability eps_air; the drop is
    written back into the latent process so that it persists.

    Attributes:
        n_shares: the number of shares to sell within the horizon
        window: the number of recent prices in the exogenous state
        arma: the coefficients of the latent price process
        frozen_noise: whether every episode replays the same innovations
    """

    env_id = "order"
    exo_dim = 3
    endo_dim = 1
    endo_kind = EndoKind.INT
    reward_range = (0.0, 5.0)
    exo_scale = (1.0, 1.0, 1.0)
    endo_scale = (0.1,)
    endo_bounds = (0.0, 10.0)

    def __init__(
        self,
        eps_air: float = 0.0,
        rng: Optional[RngStream] = None,
        horizon: int = 100,
        n_shares: int = 10,
        n_actions: int = 6,
        window: int = 3,
        frozen_noise: bool = False,
        arma: Optional[ArmaParams] = None,
    ):
        super().__init__(horizon=horizon, n_actions=n_actions, eps_air=eps_air)
        if arma is None and rng is None:
            raise EnvError("either arma parameters or an rng are required")
        if window > BURN_IN_STEPS:
            raise EnvError(f"window must not exceed {BURN_IN_STEPS}")

        self.n_shares = n_shares
        self.window = window
        self.exo_dim = window
        self.exo_scale = (1.0,) * window
        self.endo_bounds = (0.0, float(n_shares))
        self.reward_range = (0.0, float(n_actions - 1))
        self.arma = arma if arma is not None else ArmaParams.draw(rng.child("arma"))
        self.frozen_noise = frozen_noise
        self._frozen_innovations: Optional[np.ndarray] = None
        if frozen_noise:
            noise_rng = rng.child("noise") if rng is not None else RngStream(0, "noise")
            self._frozen_innovations = noise_rng.normal(
                size=BURN_IN_STEPS + horizon + 1
            )

        self._latent = np.zeros(2)
        self._innovations = np.zeros(2)
        self._t = 0

    def endo_sweep(self):
        return list(range(self.n_shares + 1))

    def _reset(self, rng: RngStream) -> FactoredState:
        self._latent = np.zeros(2)
        self._innovations = np.zeros(2)
        self._t = 0
        prices = [self.arma_exo_step(False, rng) for _ in range(BURN_IN_STEPS)]
        return FactoredState(
            exo=tuple(prices[-self.window :]), endo=self.n_shares, kind=self.endo_kind
        )

    def arma_exo_step(self, sold_positive: bool, rng: RngStream) -> float:
        """Advances the latent ARMA process by one step and publishes the price"""
        p = self.arma
        innovation = p.sigma * rng.normal()
        if self._frozen_innovations is not None:
            innovation = p.sigma * self._frozen_innovations[self._t]
        self._t += 1

        latent = (
            p.c
            + innovation
            + p.phi1 * self._latent[0]
            + p.phi2 * self._latent[1]
            + p.theta1 * self._innovations[0]
            + p.theta2 * self._innovations[1]
        )
        price = min(max(latent / PRICE_SCALE + 0.5, 0.0), 1.0)

        # the impact uniform is drawn on every step so that the exogenous
        # stream does not depend on the actions when eps_air is 0
        impact = rng.random() < self.eps_air
        if sold_positive and impact:
            price = IMPACT_FACTOR * price
            latent = PRICE_SCALE * (price - 0.5)

        self._latent = np.array([latent, self._latent[0]])
        self._innovations = np.array([innovation, self._innovations[0]])
        return float(price)

    def transition(
        self, state: FactoredState, action: int, rng: RngStream
    ) -> Tuple[FactoredState, float]:
        shares = int(state.endo)
        sold = min(int(action), shares)
        reward = state.exo[-1] * sold
        next_price = self.arma_exo_step(sold > 0, rng)
        next_state = FactoredState(
            exo=state.exo[1:] + (next_price,), endo=shares - sold, kind=self.endo_kind
        )
        return next_state, reward

    def endo_transition(
        self,
        h: HorizonIndex,
        exo: np.ndarray,
        endo: np.ndarray,
        action: np.ndarray,
        next_exo: Optional[np.ndarray],
        rng: Optional[RngStream] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        shares = np.asarray(endo, dtype=float)[:, 0]
        sold = np.minimum(np.asarray(action, dtype=float), shares)
        reward = np.asarray(exo, dtype=float)[:, -1] * sold
        return (shares - sold)[:, None], reward
