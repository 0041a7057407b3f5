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
"""Endogenous transition and reward models"""
import abc
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from app.libs.approx import FitConfig, MlpApproximator, approximator_from_dict
from app.libs.core import Dataset, EndoKind, RngStream, split_dataset
from app.libs.envs import Environment, TabularAirEnv, TabularMdp, sample_rows
from app.utils.logging import get_logger

from .exc import ModelError, ModelNotFittedError

HorizonIndex = Union[int, np.ndarray]

logger = get_logger(__name__)


class EndoModel(abc.ABC):
    """A model of the endogenous transition and the reward

    Attributes:
        kind: "exact", "tabular" or "learned"
        deterministic: whether step needs no randomness
        needs_next_exo: whether step needs the exo value of step h+1
    """

    kind: str = ""
    deterministic: bool = True
    needs_next_exo: bool = True

    @abc.abstractmethod
    def step(
        self,
        h: HorizonIndex,
        exo: np.ndarray,
        endo: np.ndarray,
        action: np.ndarray,
        next_exo: Optional[np.ndarray],
        rng: Optional[RngStream] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Next endogenous values (n, m) and rewards (n,) for a batch of rows"""

    def kernel(
        self,
        h: int,
        exo: np.ndarray,
        endo: np.ndarray,
        action: np.ndarray,
        next_exo: np.ndarray,
        endo_values: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Distribution of the next endogenous value over a finite grid

        Args:
            endo_values: (S, m) grid every next endogenous value must lie on

        Returns:
            (n, S) probabilities and (n,) rewards

        Raises:
            ModelError: if a next endogenous value is off the grid
        """
        if not self.deterministic:
            raise ModelError(f"{self.kind} endo model has no closed-form kernel")
        next_endo, reward = self.step(h, exo, endo, action, next_exo)
        return one_hot_on_grid(next_endo, endo_values), reward


def one_hot_on_grid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    lookup = {tuple(row.tolist()): i for i, row in enumerate(np.asarray(grid, float))}
    probs = np.zeros((len(values), len(grid)))
    for row, value in enumerate(np.asarray(values, dtype=float)):
        index = lookup.get(tuple(value.tolist()))
        if index is None:
            raise ModelError(f"endogenous value {value} is not on the grid")
        probs[row, index] = 1.0
    return probs


class ExactEndoModel(EndoModel):
    """The environment's own endogenous transition and reward"""

    kind = "exact"

    def __init__(self, env: Environment):
        self.env = env

    @property
    def needs_next_exo(self) -> bool:
        return self.env.needs_next_exo

    def step(self, h, exo, endo, action, next_exo, rng=None):
        return self.env.endo_transition(h, exo, endo, action, next_exo, rng)


class TabularEndoModel(EndoModel):
    """The endogenous kernel and rewards of a TabularMdp, possibly perturbed"""

    kind = "tabular"
    deterministic = False

    def __init__(self, mdp: TabularMdp):
        self.mdp = mdp

    def _rows(self, h, exo, endo, action, next_exo):
        if next_exo is None:
            raise ModelError("the tabular endo model needs the next exo state")
        x = np.asarray(exo)[:, 0].astype(int)
        e = np.asarray(endo)[:, 0].astype(int)
        a = np.asarray(action).astype(int)
        x_next = np.asarray(next_exo)[:, 0].astype(int)
        return self.mdp.p_end[h, x, e, a, x_next], self.mdp.r[h, x, e, a, x_next]

    def step(self, h, exo, endo, action, next_exo, rng=None):
        if rng is None:
            raise ModelError("sampling the tabular endo model needs an rng")
        probs, reward = self._rows(h, exo, endo, action, next_exo)
        return sample_rows(probs, rng)[:, None].astype(float), reward

    def kernel(self, h, exo, endo, action, next_exo, endo_values):
        if len(endo_values) != self.mdp.n_endo:
            raise ModelError("the grid must list every tabular endo state")
        return self._rows(h, exo, endo, action, next_exo)


def exact_endo_model(env: Environment) -> EndoModel:
    """The exact model of an environment"""
    if isinstance(env, TabularAirEnv):
        return TabularEndoModel(env.mdp)
    return ExactEndoModel(env)


@dataclass(frozen=True)
class EndoFitReport:
    heldout_mae: float
    n_train: int
    n_heldout: int
    has_variation: bool


class LearnedEndoModel(EndoModel):
    """A two-layer network predicting the next endogenous value

    The network sees (exo, endo, one-hot action, next exo) and predicts the
    scaled change of the endogenous value. Predictions are clamped to the
    environment's endogenous bounds and rounded for integer kinds. Rewards
    come from the environment's formula unless learn_reward is set.

    Attributes:
        env: the environment providing feature scales, bounds and the reward
        learn_reward: whether a reward head answers instead of the formula
        report: the held-out error of the last fit
    """

    kind = "learned"

    def __init__(
        self,
        env: Environment,
        hidden: int = 128,
        rng: Optional[RngStream] = None,
        learn_reward: bool = False,
    ):
        self.env = env
        self.learn_reward = learn_reward
        n_inputs = 2 * env.exo_dim + env.endo_dim + env.n_actions
        n_outputs = env.endo_dim + int(learn_reward)
        self.network = MlpApproximator(n_inputs, n_outputs, hidden=hidden, rng=rng)
        self.fitted = False
        self.report: Optional[EndoFitReport] = None

    def inputs(self, exo, endo, action, next_exo) -> np.ndarray:
        env = self.env
        one_hot = np.eye(env.n_actions)[np.asarray(action, dtype=int)]
        return np.concatenate(
            [
                np.asarray(exo, float) * np.asarray(env.exo_scale),
                np.asarray(endo, float) * np.asarray(env.endo_scale),
                one_hot,
                np.asarray(next_exo, float) * np.asarray(env.exo_scale),
            ],
            axis=1,
        )

    def targets(self, endo, next_endo, reward) -> np.ndarray:
        delta = (np.asarray(next_endo) - np.asarray(endo)) * np.asarray(
            self.env.endo_scale
        )
        if self.learn_reward:
            return np.column_stack([delta, np.asarray(reward) / self.env.r_max])
        return delta

    def step(self, h, exo, endo, action, next_exo, rng=None):
        if not self.fitted:
            raise ModelNotFittedError("the learned endo model has not been fitted")
        if next_exo is None:
            raise ModelError("the learned endo model needs the next exo state")
        out = self.network.predict(self.inputs(exo, endo, action, next_exo))
        m = self.env.endo_dim
        next_endo = to_endo_domain(
            np.asarray(endo, float) + out[:, :m] / np.asarray(self.env.endo_scale),
            self.env,
        )
        if self.learn_reward:
            low, high = self.env.reward_range
            reward = np.clip(out[:, m] * self.env.r_max, low, high)
        else:
            reward = self.env.endo_transition(h, exo, endo, action, next_exo, rng)[1]
        return next_endo, reward

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "env": self.env.env_id,
            "learn_reward": self.learn_reward,
            "network": self.network.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], env: Environment) -> "LearnedEndoModel":
        model = cls(env, learn_reward=bool(data["learn_reward"]))
        model.network = approximator_from_dict(data["network"])
        model.fitted = True
        return model


def to_endo_domain(values: np.ndarray, env: Environment) -> np.ndarray:
    """Clamps to the environment's endogenous bounds, rounding integer kinds"""
    low, high = env.endo_bounds
    values = np.clip(values, low, high)
    if env.endo_kind == EndoKind.INT:
        values = np.round(values)
    return values


def endo_step(
    m: EndoModel,
    exo: np.ndarray,
    endo: np.ndarray,
    action: np.ndarray,
    next_exo: Optional[np.ndarray],
    rng: Optional[RngStream] = None,
    h: HorizonIndex = 0,
) -> Tuple[np.ndarray, np.ndarray]:
    return m.step(h, exo, endo, action, next_exo, rng)


def fit_endo_model(
    d: Dataset,
    cfg: FitConfig,
    env: Environment,
    learn_reward: bool = False,
    heldout_fraction: float = 0.1,
) -> LearnedEndoModel:
    """Trains a LearnedEndoModel on the recorded endogenous transitions

    A share of the episodes is held out to report the mean absolute error of
    the next endogenous value; with too few episodes the error is measured on
    the training data.
    """
    rng = RngStream(cfg.seed, "endo_model")
    train, heldout = d, None
    if len(d) >= 2:
        train, heldout = split_dataset(d, 1.0 - heldout_fraction, rng.child("split"))
        if len(heldout) == 0:
            train, heldout = d, None

    t = train.transitions
    rows = t.has_next
    if not np.any(rows):
        raise ModelError("no recorded transitions with a successor")

    has_variation = bool(np.any(t.next_endo[rows] != t.endo[rows]))
    if not has_variation:
        logger.warning("no endo variation in the dataset")

    model = LearnedEndoModel(
        env, hidden=cfg.hidden, rng=rng.child("init"), learn_reward=learn_reward
    )
    model.network.fit_full(
        model.inputs(t.exo[rows], t.endo[rows], t.action[rows], t.next_exo[rows]),
        model.targets(t.endo[rows], t.next_endo[rows], t.reward[rows]),
        cfg,
        rng.child("fit"),
    )
    model.fitted = True

    evaluation = (heldout if heldout is not None else train).transitions
    eval_rows = evaluation.has_next
    predicted, _ = model.step(
        evaluation.h[eval_rows],
        evaluation.exo[eval_rows],
        evaluation.endo[eval_rows],
        evaluation.action[eval_rows],
        evaluation.next_exo[eval_rows],
        rng.child("eval"),
    )
    model.report = EndoFitReport(
        heldout_mae=float(np.mean(np.abs(predicted - evaluation.next_endo[eval_rows]))),
        n_train=int(rows.sum()),
        n_heldout=int(eval_rows.sum()) if heldout is not None else 0,
        has_variation=has_variation,
    )
    logger.info(f"fitted endo model, held-out MAE {model.report.heldout_mae:.4g}")
    return model
