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

import copy
from typing import Any, Dict, List, Optional, Union

import numpy as np

from app.libs.core import FactoredState, RngStream

from .approximators import Approximator, approximator_from_dict, make_approximator
from .dtos import FitConfig, FunctionClass, QMode
from .exc import ContractError
from .features import Featurizer

HorizonIndex = Union[int, np.ndarray]


class QFunction:
    """Action values over factored states for every horizon step

    In PER_HORIZON mode there is one approximator per step h < H; in SHARED
    mode a single approximator receives h/H as an extra feature. In both
    modes the values at h = H are 0.

    Attributes:
        fclass: the function class of the approximators
        mode: the horizon mode
        featurizer: the feature map, including h/H in SHARED mode
        n_actions: the number of actions
    """

    def __init__(
        self,
        fclass: FunctionClass,
        featurizer: Featurizer,
        n_actions: int,
        mode: QMode = QMode.PER_HORIZON,
        rng: Optional[RngStream] = None,
        hidden: int = 128,
        approximators: Optional[List[Approximator]] = None,
    ):
        self.fclass = FunctionClass(fclass)
        self.mode = QMode(mode)
        self.featurizer = featurizer.with_horizon(self.mode == QMode.SHARED)
        self.n_actions = n_actions
        self.hidden = hidden

        if approximators is not None:
            self._approximators = approximators
        elif self.mode == QMode.SHARED:
            self._approximators = [self._new_approximator(rng, "init/shared")]
        else:
            self._approximators = [
                self._new_approximator(rng, f"init/h{h}") for h in range(self.horizon)
            ]

    def _new_approximator(self, rng: Optional[RngStream], label: str) -> Approximator:
        return make_approximator(
            self.fclass,
            self.featurizer.n_features,
            self.n_actions,
            rng=rng.child(label) if rng is not None else None,
            hidden=self.hidden,
        )

    @property
    def horizon(self) -> int:
        return self.featurizer.horizon

    def slot(self, h: int) -> Approximator:
        """The approximator answering for step h < H"""
        self._check_step(h, allow_end=False)
        return self._approximators[0 if self.mode == QMode.SHARED else h]

    def set_slot(self, h: int, approximator: Approximator):
        self._check_step(h, allow_end=False)
        self._approximators[0 if self.mode == QMode.SHARED else h] = approximator

    def features(
        self, exo: np.ndarray, endo: np.ndarray, h: HorizonIndex
    ) -> np.ndarray:
        return self.featurizer.transform(exo, endo, h)

    def values(self, exo: np.ndarray, endo: np.ndarray, h: HorizonIndex) -> np.ndarray:
        """(n, A) action values of n rows at step h, an int or an (n,) array"""
        exo = np.asarray(exo, dtype=float)
        endo = np.asarray(endo, dtype=float)
        steps = np.broadcast_to(np.asarray(h, dtype=int), (exo.shape[0],))
        out = np.zeros((exo.shape[0], self.n_actions))
        for step in np.unique(steps):
            self._check_step(int(step))
            if step == self.horizon:
                continue
            rows = steps == step
            x = self.features(exo[rows], endo[rows], int(step))
            out[rows] = self.slot(int(step)).predict(x)
        return out

    def greedy(self, exo: np.ndarray, endo: np.ndarray, h: HorizonIndex) -> np.ndarray:
        """Greedy actions; ties go to the lowest action index"""
        return np.argmax(self.values(exo, endo, h), axis=1)

    def predict(self, state: FactoredState, h: int, action: int) -> float:
        """The value of one (state, action) pair at step h

        Raises:
            ContractError: if h is outside [0, H] or the action is out of range
        """
        self._check_step(h)
        if not 0 <= action < self.n_actions:
            raise ContractError(f"action {action} out of range [0, {self.n_actions})")
        values = self.values(
            np.array([state.exo], dtype=float),
            np.array([state.endo_vector()], dtype=float),
            h,
        )
        return float(values[0, action])

    def fit_slot(
        self,
        h: int,
        exo: np.ndarray,
        endo: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        cfg: FitConfig,
        rng: Optional[RngStream] = None,
    ) -> List[float]:
        """Regresses the values of step h onto the targets"""
        x = self.features(exo, endo, h)
        return self.slot(h).fit(x, actions, targets, cfg, rng)

    def _check_step(self, h: int, allow_end: bool = True):
        upper = self.horizon if allow_end else self.horizon - 1
        if not 0 <= h <= upper:
            raise ContractError(f"horizon step {h} out of range [0, {upper}]")

    def copy(self) -> "QFunction":
        return copy.deepcopy(self)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "qfunction",
            "fclass": self.fclass.value,
            "mode": self.mode.value,
            "n_actions": self.n_actions,
            "hidden": self.hidden,
            "featurizer": self.featurizer.to_dict(),
            "approximators": [a.to_dict() for a in self._approximators],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QFunction":
        return cls(
            fclass=FunctionClass(data["fclass"]),
            featurizer=Featurizer.from_dict(data["featurizer"]),
            n_actions=int(data["n_actions"]),
            mode=QMode(data["mode"]),
            hidden=int(data["hidden"]),
            approximators=[approximator_from_dict(a) for a in data["approximators"]],
        )
