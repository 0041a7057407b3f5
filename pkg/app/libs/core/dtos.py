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
"""Data Transfer Objects shared by every library module"""
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from .exc import DatasetError

EndoValue = Union[int, Tuple[float, ...]]


class EndoKind(str, Enum):
    INT = "int"
    REAL = "real"


@dataclass(frozen=True)
class FactoredState:
    """A state split into its exogenous and endogenous parts

    Attributes:
        exo: the exogenous vector
        endo: a non-negative integer for integer kind, a real vector otherwise
        kind: the kind of the endogenous value
    """

    exo: Tuple[float, ...]
    endo: EndoValue
    kind: EndoKind = EndoKind.INT

    @classmethod
    def from_arrays(
        cls, exo: Sequence[float], endo: Sequence[float], kind: EndoKind
    ) -> "FactoredState":
        """Creates a state from the row representation used by Dataset arrays"""
        exo = tuple(float(v) for v in exo)
        if kind == EndoKind.INT:
            return cls(exo=exo, endo=int(endo[0]), kind=kind)
        return cls(exo=exo, endo=tuple(float(v) for v in endo), kind=kind)

    def endo_vector(self) -> Tuple[float, ...]:
        """The endogenous value as a tuple of floats"""
        if isinstance(self.endo, tuple):
            return tuple(float(v) for v in self.endo)
        return (float(self.endo),)


@dataclass(frozen=True)
class EpisodeStep:
    state: FactoredState
    action: int
    reward: float


@dataclass(frozen=True)
class Episode:
    """The records of a single trajectory

    Attributes:
        steps: the (state, action, reward) records, one per horizon step
        final_state: the state observed after the last action, if recorded
    """

    steps: Tuple[EpisodeStep, ...]
    final_state: Optional[FactoredState] = None

    def __len__(self):
        return len(self.steps)


class DatasetMeta(BaseModel):
    """The metadata stored next to every dataset file"""

    env: str
    policy: str
    eps_air: float
    seed: int
    H: int
    n_actions: int
    exo_dim: int
    endo_kind: EndoKind = EndoKind.INT
    endo_dim: int = 1

    @field_validator("eps_air")
    @classmethod
    def eps_air_in_unit_interval(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"eps_air must lie in [0, 1], got {v}")
        return v

    @field_validator("H", "n_actions", "exo_dim", "endo_dim")
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be a positive integer")
        return v


class AirSpec(BaseModel):
    """The regime parameters of an action-impact-regular problem

    v_max is derived from horizon and r_max when it is left out.
    """

    horizon: int
    eps_air: float = 0.0
    eps_p: float = 0.0
    r_max: float
    v_max: Optional[float] = None
    n_actions: int
    endo_sweep: List[Union[int, float, Tuple[float, ...]]]

    @field_validator("eps_air", "eps_p")
    @classmethod
    def eps_in_unit_interval(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {v}")
        return v

    @model_validator(mode="after")
    def check_scales(self):
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if self.n_actions < 1:
            raise ValueError("n_actions must be a positive integer")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if not self.endo_sweep:
            raise ValueError("endo_sweep must not be empty")

        expected = self.horizon * self.r_max
        if self.v_max is None:
            self.v_max = expected
        elif self.v_max != expected:
            raise ValueError(f"v_max must equal H * r_max = {expected}")
        return self

    def sweep_array(self) -> np.ndarray:
        """The endogenous sweep as an (S, m) float array"""
        rows = [
            tuple(v) if isinstance(v, (tuple, list)) else (float(v),)
            for v in self.endo_sweep
        ]
        return np.asarray(rows, dtype=float)


@dataclass(frozen=True)
class TransitionBatch:
    """Flat view of every recorded step with its successor

    Rows of the last step carry NaN successors when the episode has no
    recorded final state; has_next flags the rows that have one.
    """

    episode: np.ndarray
    h: np.ndarray
    exo: np.ndarray
    endo: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    next_exo: np.ndarray
    next_endo: np.ndarray
    has_next: np.ndarray

    def __len__(self):
        return len(self.h)


@dataclass(frozen=True)
class Dataset:
    """N episodes collected by one behavior policy

    Array views are computed on first access and require every episode to
    have the same length.
    """

    episodes: Tuple[Episode, ...]
    meta: DatasetMeta

    def __len__(self):
        return len(self.episodes)

    @property
    def horizon(self) -> int:
        return self.meta.H

    @property
    def n_transitions(self) -> int:
        return sum(len(ep) for ep in self.episodes)

    @property
    def has_final_states(self) -> bool:
        return bool(self.episodes) and all(
            ep.final_state is not None for ep in self.episodes
        )

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """A dataset holding the episodes at the given indices, in that order"""
        return Dataset(
            episodes=tuple(self.episodes[int(i)] for i in indices), meta=self.meta
        )

    def concat(self, other: "Dataset") -> "Dataset":
        """The episodes of both datasets under this dataset's metadata"""
        return Dataset(episodes=self.episodes + other.episodes, meta=self.meta)

    def without_final_states(self) -> "Dataset":
        """The same episodes with exactly H records each and no terminal state"""
        return Dataset(
            episodes=tuple(replace(ep, final_state=None) for ep in self.episodes),
            meta=self.meta,
        )

    @cached_property
    def _arrays(self) -> Tuple[np.ndarray, ...]:
        lengths = {len(ep) for ep in self.episodes}
        if len(lengths) > 1:
            raise DatasetError(f"episodes have different lengths: {sorted(lengths)}")

        exo = np.array(
            [[step.state.exo for step in ep.steps] for ep in self.episodes],
            dtype=float,
        )
        endo = np.array(
            [[step.state.endo_vector() for step in ep.steps] for ep in self.episodes],
            dtype=float,
        )
        actions = np.array(
            [[step.action for step in ep.steps] for ep in self.episodes], dtype=int
        )
        rewards = np.array(
            [[step.reward for step in ep.steps] for ep in self.episodes], dtype=float
        )
        return exo, endo, actions, rewards

    @property
    def exo(self) -> np.ndarray:
        """(N, H, k) exogenous values"""
        return self._arrays[0]

    @property
    def endo(self) -> np.ndarray:
        """(N, H, m) endogenous values"""
        return self._arrays[1]

    @property
    def actions(self) -> np.ndarray:
        return self._arrays[2]

    @property
    def rewards(self) -> np.ndarray:
        return self._arrays[3]

    @cached_property
    def final_exo(self) -> Optional[np.ndarray]:
        """(N, k) exogenous values observed after the last action"""
        if not self.has_final_states:
            return None
        return np.array([ep.final_state.exo for ep in self.episodes], dtype=float)

    @cached_property
    def final_endo(self) -> Optional[np.ndarray]:
        if not self.has_final_states:
            return None
        return np.array(
            [ep.final_state.endo_vector() for ep in self.episodes], dtype=float
        )

    def exo_trajectories(self) -> np.ndarray:
        """The exogenous projection of the dataset

        Returns:
            an (N, H+1, k) array when final states are recorded, (N, H, k) otherwise
        """
        if self.final_exo is None:
            return self.exo
        return np.concatenate([self.exo, self.final_exo[:, None, :]], axis=1)

    def next_exo(self, h: int) -> Optional[np.ndarray]:
        """(N, k) exogenous values at step h+1, None when not recorded"""
        if h + 1 < self.exo.shape[1]:
            return self.exo[:, h + 1]
        return self.final_exo

    def next_endo(self, h: int) -> Optional[np.ndarray]:
        if h + 1 < self.endo.shape[1]:
            return self.endo[:, h + 1]
        return self.final_endo

    @cached_property
    def transitions(self) -> TransitionBatch:
        n, horizon, k = self.exo.shape
        m = self.endo.shape[2]
        next_exo = np.full((n, horizon, k), np.nan)
        next_endo = np.full((n, horizon, m), np.nan)
        next_exo[:, :-1] = self.exo[:, 1:]
        next_endo[:, :-1] = self.endo[:, 1:]
        has_next = np.ones((n, horizon), dtype=bool)
        if self.final_exo is not None:
            next_exo[:, -1] = self.final_exo
            next_endo[:, -1] = self.final_endo
        else:
            has_next[:, -1] = False

        episode, h = np.meshgrid(np.arange(n), np.arange(horizon), indexing="ij")
        return TransitionBatch(
            episode=episode.reshape(-1),
            h=h.reshape(-1),
            exo=self.exo.reshape(-1, k),
            endo=self.endo.reshape(-1, m),
            action=self.actions.reshape(-1),
            reward=self.rewards.reshape(-1),
            next_exo=next_exo.reshape(-1, k),
            next_endo=next_endo.reshape(-1, m),
            has_next=has_next.reshape(-1),
        )


def episode_from_arrays(
    exo: np.ndarray,
    endo: np.ndarray,
    actions: Sequence[int],
    rewards: Sequence[float],
    kind: EndoKind,
    final_exo: Optional[Sequence[float]] = None,
    final_endo: Optional[Sequence[float]] = None,
) -> Episode:
    """Builds an episode from per-step arrays

    Args:
        exo: (H, k) exogenous values
        endo: (H, m) endogenous values
        actions: H actions
        rewards: H rewards
        kind: the endogenous kind
        final_exo: the exogenous value observed after the last action
        final_endo: the endogenous value observed after the last action

    Returns:
        the episode
    """
    steps = tuple(
        EpisodeStep(
            state=FactoredState.from_arrays(exo[h], endo[h], kind),
            action=int(actions[h]),
            reward=float(rewards[h]),
        )
        for h in range(len(actions))
    )
    final_state = None
    if final_exo is not None:
        final_state = FactoredState.from_arrays(final_exo, final_endo, kind)
    return Episode(steps=steps, final_state=final_state)
