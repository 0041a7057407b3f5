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
"""Explicit finite factored MDPs"""
import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.libs.core import EndoKind, FactoredState, RngStream
from app.utils.logging import get_logger

from .base import Environment, HorizonIndex
from .exc import EnvError, InvalidMdpError

ROW_SUM_TOLERANCE = 1e-12

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """A finite-horizon MDP over (exo index, endo index) states

    The endogenous kernel is conditioned on the next exogenous state.

    Attributes:
        p_exo: (H, nx, A, nx) exogenous kernel
        p_end: (H, nx, ne, A, nx, ne) endogenous kernel given the next exo state
        r: (H, nx, ne, A, nx) rewards given the next exo state
        nu: (nx, ne) initial distribution
        r_max: the bound on the absolute reward
    """

    p_exo: np.ndarray
    p_end: np.ndarray
    r: np.ndarray
    nu: np.ndarray
    r_max: float = 1.0

    def __post_init__(self):
        self.validate()

    @property
    def horizon(self) -> int:
        return self.p_exo.shape[0]

    @property
    def n_exo(self) -> int:
        return self.p_exo.shape[1]

    @property
    def n_actions(self) -> int:
        return self.p_exo.shape[2]

    @property
    def n_endo(self) -> int:
        return self.nu.shape[1]

    def validate(self, tolerance: float = ROW_SUM_TOLERANCE):
        """Checks shapes, normalization and the reward range

        Raises:
            InvalidMdpError: on the first violation found
        """
        horizon, nx, n_actions = self.p_exo.shape[:3]
        ne = self.nu.shape[1] if self.nu.ndim == 2 else 0
        shapes = {
            "p_exo": (self.p_exo.shape, (horizon, nx, n_actions, nx)),
            "p_end": (self.p_end.shape, (horizon, nx, ne, n_actions, nx, ne)),
            "r": (self.r.shape, (horizon, nx, ne, n_actions, nx)),
            "nu": (self.nu.shape, (nx, ne)),
        }
        for name, (actual, expected) in shapes.items():
            if actual != expected:
                raise InvalidMdpError(f"{name} has shape {actual}, expected {expected}")

        for name, dist in (("p_exo", self.p_exo), ("p_end", self.p_end)):
            if np.any(dist < 0):
                raise InvalidMdpError(f"{name} has negative probabilities")
            gap = np.max(np.abs(dist.sum(axis=-1) - 1.0))
            if gap > tolerance:
                raise InvalidMdpError(f"{name} rows do not sum to 1 (gap {gap:.3g})")
        if abs(self.nu.sum() - 1.0) > tolerance or np.any(self.nu < 0):
            raise InvalidMdpError("nu is not a distribution")
        if np.any(np.abs(self.r) > self.r_max):
            raise InvalidMdpError(f"rewards exceed r_max={self.r_max}")

    def replace(self, **changes) -> "TabularMdp":
        return dataclasses.replace(self, **changes)

    def joint_kernel(self, h: int) -> np.ndarray:
        """(nx, ne, A, nx, ne) probability of the next (exo, endo) pair at step h"""
        return self.p_exo[h][:, None, :, :, None] * self.p_end[h]


def make_random_tabular_air_mdp(
    n_exo: int,
    n_endo: int,
    n_actions: int,
    horizon: int,
    eps_air: float,
    rng: RngStream,
    r_max: float = 1.0,
) -> TabularMdp:
    """Draws a random tabular MDP whose exogenous kernel is eps_air-AIR

    A base kernel is drawn per (h, exo state). Action 0 follows it, action 1
    mixes it with the point mass on its least likely state, and every other
    action mixes it with a point mass on a random state, each with weight
    eps_air. The largest pairwise total variation then lies in
    [eps_air / 2, eps_air].

    When the perturbation is infeasible (a single exo state or action) the
    returned MDP is 0-AIR and a warning is logged.
    """
    if min(n_exo, n_endo, n_actions, horizon) < 1:
        raise EnvError("all sizes must be at least 1")
    if not 0.0 <= eps_air <= 1.0:
        raise EnvError(f"eps_air must lie in [0, 1], got {eps_air}")

    base = rng.dirichlet(np.ones(n_exo), size=(horizon, n_exo))
    p_exo = np.repeat(base[:, :, None, :], n_actions, axis=2)

    if eps_air > 0 and (n_exo < 2 or n_actions < 2):
        logger.warning(
            f"cannot perturb the exogenous kernel with n_exo={n_exo}, "
            f"n_actions={n_actions}; achieved eps_air is 0"
        )
    elif eps_air > 0:
        eye = np.eye(n_exo)
        p_exo[:, :, 1] = (1 - eps_air) * base + eps_air * eye[base.argmin(axis=-1)]
        for action in range(2, n_actions):
            targets = rng.integers(0, n_exo, size=(horizon, n_exo))
            p_exo[:, :, action] = (1 - eps_air) * base + eps_air * eye[targets]

    p_end = rng.dirichlet(
        np.ones(n_endo), size=(horizon, n_exo, n_endo, n_actions, n_exo)
    )
    r = rng.uniform(0.0, r_max, size=(horizon, n_exo, n_endo, n_actions, n_exo))
    nu = rng.dirichlet(np.ones(n_exo * n_endo)).reshape(n_exo, n_endo)
    return TabularMdp(p_exo=p_exo, p_end=p_end, r=r, nu=nu, r_max=r_max)


def measure_air_epsilon(m: TabularMdp) -> float:
    """The largest total variation between the exo rows of two actions"""
    p = m.p_exo
    gaps = 0.5 * np.abs(p[:, :, :, None, :] - p[:, :, None, :, :]).sum(axis=-1)
    return float(gaps.max())


def perturb_endo_kernel(
    m: TabularMdp, eps_p: float, rng: RngStream
) -> Tuple[TabularMdp, float]:
    """Mixes every endogenous row with a random row

    Returns:
        the perturbed MDP and the achieved largest total variation, at most eps_p
    """
    if not 0.0 <= eps_p <= 1.0:
        raise EnvError(f"eps_p must lie in [0, 1], got {eps_p}")
    noise = rng.dirichlet(np.ones(m.n_endo), size=m.p_end.shape[:-1])
    p_end = (1 - eps_p) * m.p_end + eps_p * noise
    achieved = float((0.5 * np.abs(p_end - m.p_end).sum(axis=-1)).max())
    return m.replace(p_end=p_end), achieved


class TabularAirEnv(Environment):
    """Step-wise environment over a TabularMdp

    The exogenous state is the exo index embedded as a one-element vector and
    the endogenous state the endo index.
    """

    env_id = "tabular"
    exo_dim = 1
    endo_dim = 1
    endo_kind = EndoKind.INT
    needs_next_exo = True

    def __init__(self, mdp: TabularMdp, eps_air: Optional[float] = None):
        from_mdp = measure_air_epsilon(mdp) if eps_air is None else eps_air
        super().__init__(
            horizon=mdp.horizon, n_actions=mdp.n_actions, eps_air=min(from_mdp, 1.0)
        )
        self.mdp = mdp
        self.reward_range = (0.0, mdp.r_max)
        self.endo_bounds = (0.0, float(mdp.n_endo - 1))

    def endo_sweep(self):
        return list(range(self.mdp.n_endo))

    def _reset(self, rng: RngStream) -> FactoredState:
        m = self.mdp
        index = int(rng.choice(m.n_exo * m.n_endo, p=m.nu.reshape(-1)))
        exo, endo = divmod(index, m.n_endo)
        return FactoredState(exo=(float(exo),), endo=endo, kind=self.endo_kind)

    def transition(
        self, state: FactoredState, action: int, rng: RngStream
    ) -> Tuple[FactoredState, float]:
        m = self.mdp
        exo, endo = int(state.exo[0]), int(state.endo)
        next_exo = int(rng.choice(m.n_exo, p=m.p_exo[self._h, exo, action]))
        next_endo = int(
            rng.choice(m.n_endo, p=m.p_end[self._h, exo, endo, action, next_exo])
        )
        reward = float(m.r[self._h, exo, endo, action, next_exo])
        return (
            FactoredState(exo=(float(next_exo),), endo=next_endo, kind=self.endo_kind),
            reward,
        )

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
            raise EnvError("the tabular reward needs the next exo state")
        if rng is None:
            raise EnvError("sampling the tabular endo kernel needs an rng")
        x = np.asarray(exo)[:, 0].astype(int)
        e = np.asarray(endo)[:, 0].astype(int)
        a = np.asarray(action).astype(int)
        x_next = np.asarray(next_exo)[:, 0].astype(int)

        rows = self.mdp.p_end[h, x, e, a, x_next]
        next_endo = sample_rows(rows, rng)
        reward = self.mdp.r[h, x, e, a, x_next]
        return next_endo[:, None].astype(float), reward


def sample_rows(rows: np.ndarray, rng: RngStream) -> np.ndarray:
    """Draws one index per row of an (n, k) array of distributions"""
    u = rng.random(rows.shape[0])
    index = (np.cumsum(rows, axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(index, rows.shape[1] - 1)
