"""Learned exogenous-only and full dynamics models"""
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from app.libs.approx import FitConfig, MlpApproximator
from app.libs.core import Dataset, RngStream, split_dataset
from app.libs.envs import Environment
from app.utils.logging import get_logger

from .endo import to_endo_domain
from .exc import ModelError, ModelNotFittedError

logger = get_logger(__name__)


class DynamicsKind(str, Enum):
    EXO_ONLY = "exo_only"
    FULL = "full"


class DynamicsModel:
    """A two-layer network predicting the next state from the current one

    The EXO_ONLY kind maps the exogenous value to the next one and never sees
    the action or the endogenous value. The FULL kind maps (exo, endo,
    one-hot action) to (next exo, next endo, reward). Both predict changes of
    the scaled state rather than the state itself.

    Attributes:
        kind: the dynamics kind
        env: the environment providing scales and the endogenous domain
        heldout_mse: the squared error on held-out episodes after fitting
    """

    def __init__(
        self,
        kind: DynamicsKind,
        env: Environment,
        hidden: int = 128,
        rng: Optional[RngStream] = None,
    ):
        self.kind = DynamicsKind(kind)
        self.env = env
        k, m = env.exo_dim, env.endo_dim
        if self.kind == DynamicsKind.EXO_ONLY:
            n_inputs, n_outputs = k, k
        else:
            n_inputs, n_outputs = k + m + env.n_actions, k + m + 1
        self.network = MlpApproximator(n_inputs, n_outputs, hidden=hidden, rng=rng)
        self.fitted = False
        self.heldout_mse: Optional[float] = None

    @property
    def _exo_scale(self) -> np.ndarray:
        return np.asarray(self.env.exo_scale, dtype=float)

    @property
    def _endo_scale(self) -> np.ndarray:
        return np.asarray(self.env.endo_scale, dtype=float)

    def inputs(self, exo, endo=None, action=None) -> np.ndarray:
        exo = np.asarray(exo, dtype=float) * self._exo_scale
        if self.kind == DynamicsKind.EXO_ONLY:
            return exo
        one_hot = np.eye(self.env.n_actions)[np.asarray(action, dtype=int)]
        endo = np.asarray(endo, dtype=float) * self._endo_scale
        return np.concatenate([exo, endo, one_hot], axis=1)

    def targets(self, exo, endo, next_exo, next_endo, reward) -> np.ndarray:
        exo_delta = (np.asarray(next_exo) - np.asarray(exo)) * self._exo_scale
        if self.kind == DynamicsKind.EXO_ONLY:
            return exo_delta
        endo_delta = (np.asarray(next_endo) - np.asarray(endo)) * self._endo_scale
        return np.column_stack(
            [exo_delta, endo_delta, np.asarray(reward) / self.env.r_max]
        )

    def predict(
        self,
        exo: np.ndarray,
        endo: Optional[np.ndarray] = None,
        action: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
        """Predicted (next exo, next endo, reward) of a batch of rows

        The EXO_ONLY kind returns None for the endogenous value and reward.

        Raises:
            ModelNotFittedError: if the model has not been fitted
        """
        if not self.fitted:
            raise ModelNotFittedError(
                f"the {self.kind.value} model has not been fitted"
            )
        if self.kind == DynamicsKind.FULL and (endo is None or action is None):
            raise ModelError("the full model needs endo values and actions")

        exo = np.asarray(exo, dtype=float)
        out = self.network.predict(self.inputs(exo, endo, action))
        k = self.env.exo_dim
        next_exo = exo + out[:, :k] / self._exo_scale
        if self.kind == DynamicsKind.EXO_ONLY:
            return next_exo, None, None

        m = self.env.endo_dim
        next_endo = to_endo_domain(
            np.asarray(endo, float) + out[:, k : k + m] / self._endo_scale, self.env
        )
        low, high = self.env.reward_range
        reward = np.clip(out[:, k + m] * self.env.r_max, low, high)
        return next_exo, next_endo, reward


def fit_dynamics_model(
    d: Dataset,
    kind: DynamicsKind,
    cfg: FitConfig,
    env: Environment,
    heldout_fraction: float = 0.1,
) -> DynamicsModel:
    """Trains a DynamicsModel on the recorded transitions by squared loss

    Raises:
        ModelError: if no recorded transition has a successor
    """
    kind = DynamicsKind(kind)
    rng = RngStream(cfg.seed, f"dynamics/{kind.value}")
    train, heldout = d, None
    if len(d) >= 2:
        train, heldout = split_dataset(d, 1.0 - heldout_fraction, rng.child("split"))
        if len(heldout) == 0:
            train, heldout = d, None

    model = DynamicsModel(kind, env, hidden=cfg.hidden, rng=rng.child("init"))
    t = train.transitions
    rows = t.has_next
    if not np.any(rows):
        raise ModelError("no recorded transitions with a successor")

    model.network.fit_full(
        model.inputs(t.exo[rows], t.endo[rows], t.action[rows]),
        model.targets(
            t.exo[rows],
            t.endo[rows],
            t.next_exo[rows],
            t.next_endo[rows],
            t.reward[rows],
        ),
        cfg,
        rng.child("fit"),
    )
    model.fitted = True

    e = (heldout if heldout is not None else train).transitions
    e_rows = e.has_next
    predicted = model.network.predict(
        model.inputs(e.exo[e_rows], e.endo[e_rows], e.action[e_rows])
    )
    target = model.targets(
        e.exo[e_rows],
        e.endo[e_rows],
        e.next_exo[e_rows],
        e.next_endo[e_rows],
        e.reward[e_rows],
    )
    model.heldout_mse = float(np.mean((predicted - target) ** 2))
    logger.info(
        f"fitted {kind.value} dynamics model, held-out MSE {model.heldout_mse:.4g}"
    )
    return model
