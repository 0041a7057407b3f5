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
"""Policies over factored states and their text form"""
import abc
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from app.libs.approx import QFunction, SerializationError, dumps, loads
from app.libs.core import FactoredState, RngStream
from app.libs.envs import sample_rows

from .exc import AlgorithmError

HorizonIndex = Union[int, np.ndarray]

_EXTRA_READERS: Dict[str, Callable[[Dict[str, Any]], "Policy"]] = {}


class Policy(abc.ABC):
    """Maps (h, exo, endo) rows to actions

    Attributes:
        kind: the text tag of the policy
        deterministic: whether act ignores its rng
    """

    kind: str = ""
    deterministic: bool = True

    @abc.abstractmethod
    def act(
        self,
        h: HorizonIndex,
        exo: np.ndarray,
        endo: np.ndarray,
        rng: Optional[RngStream] = None,
    ) -> np.ndarray:
        """(n,) actions for exo (n, k) and endo (n, m) rows at step h"""

    def act_state(
        self, h: int, state: FactoredState, rng: Optional[RngStream] = None
    ) -> int:
        action = self.act(
            h,
            np.array([state.exo], dtype=float),
            np.array([state.endo_vector()], dtype=float),
            rng,
        )
        return int(action[0])

    @abc.abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass


class GreedyPolicy(Policy):
    """Greedy in a QFunction; ties go to the lowest action index"""

    kind = "greedy"

    def __init__(self, q: QFunction):
        self.q = q

    def act(self, h, exo, endo, rng=None):
        return self.q.greedy(exo, endo, h)

    def to_dict(self):
        return {"kind": self.kind, "q": self.q.to_dict()}


class MaskedGreedyPolicy(Policy):
    """Greedy in a QFunction whose values are replaced where the data is thin

    Actions with estimated density below the threshold take the floor value.
    Where every action is masked the action is drawn uniformly from the
    policy's own tie-break stream.

    Attributes:
        q: the action values
        density: the state-action density estimate of the data
        threshold: the density below which a value is masked
        floor: the value given to masked actions
    """

    kind = "masked_greedy"
    deterministic = False

    def __init__(
        self,
        q: QFunction,
        density,
        threshold: float,
        floor: float = 0.0,
        tie_rng: Optional[RngStream] = None,
    ):
        self.q = q
        self.density = density
        self.threshold = threshold
        self.floor = floor
        self.tie_rng = tie_rng

    def masked_values(self, h, exo, endo) -> Tuple[np.ndarray, np.ndarray]:
        """The masked values and the (n, A) mask of kept actions"""
        values = self.q.values(exo, endo, h)
        kept = self.density.mask(h, exo, endo, self.threshold)
        return np.where(kept, values, self.floor), kept

    def act(self, h, exo, endo, rng=None):
        values, kept = self.masked_values(h, exo, endo)
        actions = np.argmax(values, axis=1)
        all_masked = ~np.any(kept, axis=1)
        stream = rng if rng is not None else self.tie_rng
        if np.any(all_masked) and stream is not None:
            actions[all_masked] = stream.integers(
                0, self.q.n_actions, size=int(all_masked.sum())
            )
        return actions

    def to_dict(self):
        return {
            "kind": self.kind,
            "q": self.q.to_dict(),
            "density": self.density.to_dict(),
            "threshold": self.threshold,
            "floor": self.floor,
        }


class LookupPolicy(Policy):
    """An explicit table from (h, exo, endo) to actions; unseen states take 0"""

    kind = "lookup"

    def __init__(
        self, table: Dict[Tuple[int, Tuple[float, ...], Tuple[float, ...]], int]
    ):
        self.table = table

    def act(self, h, exo, endo, rng=None):
        exo = np.asarray(exo, dtype=float)
        endo = np.asarray(endo, dtype=float)
        steps = np.broadcast_to(np.asarray(h, dtype=int), (exo.shape[0],))
        return np.array(
            [
                self.table.get(
                    (int(step), tuple(x.tolist()), tuple(e.tolist())), 0
                )
                for step, x, e in zip(steps, exo, endo)
            ],
            dtype=int,
        )

    def to_dict(self):
        entries = [
            [h, list(exo), list(endo), action]
            for (h, exo, endo), action in sorted(self.table.items())
        ]
        return {"kind": self.kind, "entries": entries}


class TabularPolicy(Policy):
    """Action probabilities over (h, exo index, endo index)

    Attributes:
        probs: (H, nx, ne, A) action distribution of every state
    """

    kind = "tabular"

    def __init__(self, probs: np.ndarray):
        self.probs = np.asarray(probs, dtype=float)
        self.deterministic = bool(np.all(np.isin(self.probs, (0.0, 1.0))))

    @classmethod
    def from_actions(cls, actions: np.ndarray, n_actions: int) -> "TabularPolicy":
        """The deterministic policy taking actions[h, x, e]"""
        return cls(np.eye(n_actions)[np.asarray(actions, dtype=int)])

    @property
    def n_actions(self) -> int:
        return self.probs.shape[-1]

    def act(self, h, exo, endo, rng=None):
        x = np.asarray(exo)[:, 0].astype(int)
        e = np.asarray(endo)[:, 0].astype(int)
        rows = self.probs[h, x, e]
        if self.deterministic:
            return np.argmax(rows, axis=1)
        if rng is None:
            raise AlgorithmError("a stochastic tabular policy needs an rng")
        return sample_rows(rows, rng)

    def to_dict(self):
        return {"kind": self.kind, "probs": self.probs.tolist()}


def register_policy_kind(kind: str, reader: Callable[[Dict[str, Any]], Policy]):
    """Lets policy_from_text read policies defined outside this module"""
    _EXTRA_READERS[kind] = reader


def policy_to_text(policy: Policy) -> str:
    return dumps(policy.to_dict())


def policy_from_text(text: str) -> Policy:
    """Reads a policy written by policy_to_text

    Masked policies come back without their tie-break stream.

    Raises:
        SerializationError: on unknown kinds or malformed documents
    """
    from .mbs import DensityEstimate

    data = loads(text)
    try:
        kind = data["kind"]
        if kind == GreedyPolicy.kind:
            return GreedyPolicy(QFunction.from_dict(data["q"]))
        if kind == MaskedGreedyPolicy.kind:
            return MaskedGreedyPolicy(
                QFunction.from_dict(data["q"]),
                DensityEstimate.from_dict(data["density"]),
                threshold=float(data["threshold"]),
                floor=float(data["floor"]),
            )
        if kind == LookupPolicy.kind:
            return LookupPolicy(
                {
                    (int(h), tuple(exo), tuple(endo)): int(action)
                    for h, exo, endo, action in data["entries"]
                }
            )
        if kind == TabularPolicy.kind:
            return TabularPolicy(np.array(data["probs"], dtype=float))
        if kind in _EXTRA_READERS:
            return _EXTRA_READERS[kind](data)
    except (KeyError, TypeError, ValueError) as exp:
        raise SerializationError(f"incomplete {data.get('kind')} policy: {exp}")
    raise SerializationError(f"unknown policy kind {data['kind']!r}")
