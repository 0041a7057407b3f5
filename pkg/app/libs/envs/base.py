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

import abc
from typing import List, Optional, Tuple, Union

import numpy as np

from app.libs.core import AirSpec, EndoKind, FactoredState, RngStream

from .exc import EnvError

HorizonIndex = Union[int, np.ndarray]


class Environment(abc.ABC):
    """A finite-horizon environment whose state splits into exo and endo parts

    Instances are single-owner state machines. Subclasses implement
    _reset, transition and the vectorized endo_transition, which is the
    exact endogenous and reward model used by the offline algorithms.

    Attributes:
        env_id: the id under which the environment is registered
        horizon: the number of steps per episode
        n_actions: the number of discrete actions
        eps_air: the probability of an action impact event
        needs_next_exo: whether endo_transition needs the exo value of step h+1
    """

    env_id: str = ""
    exo_dim: int = 1
    endo_dim: int = 1
    endo_kind: EndoKind = EndoKind.INT
    reward_range: Tuple[float, float] = (0.0, 1.0)
    exo_scale: Tuple[float, ...] = (1.0,)
    endo_scale: Tuple[float, ...] = (1.0,)
    endo_bounds: Tuple[Optional[float], Optional[float]] = (0.0, None)
    needs_next_exo: bool = False

    def __init__(self, horizon: int, n_actions: int, eps_air: float = 0.0):
        if not 0.0 <= eps_air <= 1.0:
            raise EnvError(f"eps_air must lie in [0, 1], got {eps_air}")
        self.horizon = horizon
        self.n_actions = n_actions
        self.eps_air = eps_air
        self._rng: Optional[RngStream] = None
        self._state: Optional[FactoredState] = None
        self._h = 0

    @property
    def r_max(self) -> float:
        low, high = self.reward_range
        return max(abs(low), abs(high))

    @property
    def h(self) -> int:
        return self._h

    @property
    def state(self) -> FactoredState:
        if self._state is None:
            raise EnvError("environment has not been reset")
        return self._state

    @property
    def done(self) -> bool:
        return self._h >= self.horizon

    def reset(self, rng: RngStream) -> FactoredState:
        """Starts a new episode drawing all randomness from the given stream"""
        self._rng = rng
        self._h = 0
        self._state = self._reset(rng)
        return self._state

    def step(self, action: int) -> Tuple[FactoredState, float]:
        """Applies an action to the current state

        Raises:
            EnvError: if the episode is over or the action is out of range
        """
        if self.done:
            raise EnvError("episode is over")
        self._check_action(action)
        next_state, reward = self.transition(self.state, action, self._rng)
        self._state = next_state
        self._h += 1
        return next_state, reward

    def endo_sweep(self) -> List[Union[int, float]]:
        """The endogenous values swept over by the offline algorithms"""
        return list(range(11))

    def air_spec(self, eps_p: float = 0.0) -> AirSpec:
        return AirSpec(
            horizon=self.horizon,
            eps_air=self.eps_air,
            eps_p=eps_p,
            r_max=self.r_max,
            n_actions=self.n_actions,
            endo_sweep=self.endo_sweep(),
        )

    def _check_action(self, action: int):
        if not 0 <= int(action) < self.n_actions:
            raise EnvError(f"action {action} out of range [0, {self.n_actions})")

    @abc.abstractmethod
    def _reset(self, rng: RngStream) -> FactoredState:
        pass

    @abc.abstractmethod
    def transition(
        self, state: FactoredState, action: int, rng: RngStream
    ) -> Tuple[FactoredState, float]:
        """Samples the next state and reward from the given state"""

    @abc.abstractmethod
    def endo_transition(
        self,
        h: HorizonIndex,
        exo: np.ndarray,
        endo: np.ndarray,
        action: np.ndarray,
        next_exo: Optional[np.ndarray],
        rng: Optional[RngStream] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """The endogenous transition and reward for a batch of rows

        Args:
            h: the horizon step of every row, an int or an (n,) array
            exo: (n, k) exogenous values
            endo: (n, m) endogenous values
            action: (n,) actions
            next_exo: (n, k) next exogenous values, None when unknown
            rng: the stream for stochastic endogenous kernels

        Returns:
            (n, m) next endogenous values and (n,) rewards
        """
