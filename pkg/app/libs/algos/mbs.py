"""Marginalized behavior supported Q-iteration and its density estimate"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.libs.approx import Featurizer, FitConfig, FunctionClass, QFunction
from app.libs.core import Dataset, EmptyDatasetError, RngStream

from .exc import AlgorithmError
from .fqi import fitted_q
from .policies import GreedyPolicy, MaskedGreedyPolicy, Policy

NEGATIVE_REWARD_FLOOR = -10000.0
FLOORS = {"inventory": NEGATIVE_REWARD_FLOOR}


def masked_floor(env_id: str) -> float:
    """The value given to masked actions: 0, or a large negative number where
    rewards are negative"""
    return FLOORS.get(env_id, 0.0)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Per-step histogram of the behavior's (state, action) distribution

    States are binned on a regular grid of bins_per_dim cells per dimension
    spanning the observed range; actions are kept exact. Values outside the
    observed range have density 0.

    Attributes:
        low: (D,) smallest observed value of every state dimension
        high: (D,) largest observed value of every state dimension
        bins_per_dim: the number of cells per dimension
        n_actions: the number of actions
        keys: one sorted array of occupied (cell, action) keys per step
        probs: the empirical probability of every key
        n_total: the number of episodes
    """

    low: np.ndarray
    high: np.ndarray
    bins_per_dim: int
    n_actions: int
    keys: Tuple[np.ndarray, ...]
    probs: Tuple[np.ndarray, ...]
    n_total: int

    @property
    def horizon(self) -> int:
        return len(self.keys)

    def cells(self, exo: np.ndarray, endo: np.ndarray) -> np.ndarray:
        """The flat cell of every row, -1 outside the observed range"""
        states = np.concatenate(
            [np.asarray(exo, dtype=float), np.asarray(endo, dtype=float)], axis=1
        )
        width = (self.high - self.low) / self.bins_per_dim
        safe_width = np.where(width > 0, width, 1.0)
        index = np.floor((states - self.low) / safe_width).astype(int)
        index = np.clip(index, 0, self.bins_per_dim - 1)
        inside = np.all((states >= self.low) & (states <= self.high), axis=1)
        flat = np.ravel_multi_index(index.T, (self.bins_per_dim,) * states.shape[1])
        return np.where(inside, flat, -1)

    def mu(
        self, h, exo: np.ndarray, endo: np.ndarray, action: np.ndarray
    ) -> np.ndarray:
        """Estimated probability of every (state, action) row at step h"""
        cells = self.cells(exo, endo)
        keys = cells * self.n_actions + np.asarray(action, dtype=int)
        steps = np.broadcast_to(np.asarray(h, dtype=int), cells.shape)
        out = np.zeros(len(cells))
        for step in np.unique(steps):
            rows = (steps == step) & (cells >= 0)
            if step >= self.horizon or not np.any(rows):
                continue
            table, probs = self.keys[step], self.probs[step]
            position = np.searchsorted(table, keys[rows])
            position = np.minimum(position, len(table) - 1)
            found = table[position] == keys[rows]
            out[rows] = np.where(found, probs[position], 0.0)
        return out

    def mask(
        self, h, exo: np.ndarray, endo: np.ndarray, threshold: float
    ) -> np.ndarray:
        """(n, A) whether each action of each row has density at least threshold"""
        n = len(exo)
        columns = [
            self.mu(h, exo, endo, np.full(n, a)) >= threshold
            for a in range(self.n_actions)
        ]
        return np.stack(columns, axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "density",
            "low": self.low.tolist(),
            "high": self.high.tolist(),
            "bins_per_dim": self.bins_per_dim,
            "n_actions": self.n_actions,
            "keys": [k.tolist() for k in self.keys],
            "probs": [p.tolist() for p in self.probs],
            "n_total": self.n_total,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DensityEstimate":
        return cls(
            low=np.array(data["low"], dtype=float),
            high=np.array(data["high"], dtype=float),
            bins_per_dim=int(data["bins_per_dim"]),
            n_actions=int(data["n_actions"]),
            keys=tuple(np.array(k, dtype=np.int64) for k in data["keys"]),
            probs=tuple(np.array(p, dtype=float) for p in data["probs"]),
            n_total=int(data["n_total"]),
        )


def density_estimate(d: Dataset, bins_per_dim: int = 10) -> DensityEstimate:
    """Histogram of the discretized (state, action) pairs of every step"""
    if len(d) == 0:
        raise EmptyDatasetError("empty dataset")
    states = np.concatenate([d.exo, d.endo], axis=2)
    flat = states.reshape(-1, states.shape[2])
    estimate = DensityEstimate(
        low=flat.min(axis=0),
        high=flat.max(axis=0),
        bins_per_dim=bins_per_dim,
        n_actions=d.meta.n_actions,
        keys=(),
        probs=(),
        n_total=len(d),
    )

    keys, probs = [], []
    for h in range(d.horizon):
        cells = estimate.cells(d.exo[:, h], d.endo[:, h])
        values, counts = np.unique(
            cells * d.meta.n_actions + d.actions[:, h], return_counts=True
        )
        keys.append(values.astype(np.int64))
        probs.append(counts / len(d))
    return DensityEstimate(
        low=estimate.low,
        high=estimate.high,
        bins_per_dim=bins_per_dim,
        n_actions=estimate.n_actions,
        keys=tuple(keys),
        probs=tuple(probs),
        n_total=len(d),
    )


def mbs_qi(
    d: Dataset,
    density: DensityEstimate,
    b: float,
    fclass: FunctionClass,
    cfg: FitConfig,
    pessimistic_floor: Optional[float] = None,
    featurizer: Optional[Featurizer] = None,
    iterations: int = 1,
) -> Policy:
    """Fitted Q-iteration bootstrapping only from well-supported actions

    Targets use q_h(s, a) where the density of (s, a) is at least b and the
    floor elsewhere. With b = 0 nothing is masked and the result is the plain
    fitted Q-iteration policy: a GreedyPolicy that serializes with kind
    "greedy", carries no density and breaks ties by the lowest action index.
    With b > 0 the result is a MaskedGreedyPolicy of kind "masked_greedy"
    that draws a random action from its tie-break stream where every action
    is masked.

    Args:
        pessimistic_floor: the masked value, by default masked_floor(env)
        iterations: backward passes of neural slots

    Raises:
        AlgorithmError: if b is negative or iterations is below 1
    """
    if b < 0:
        raise AlgorithmError(f"density threshold must not be negative, got {b}")
    floor = masked_floor(d.meta.env) if pessimistic_floor is None else pessimistic_floor

    def bootstrap(q: QFunction, h: int, exo: np.ndarray, endo: np.ndarray):
        kept = density.mask(h, exo, endo, b)
        return np.where(kept, q.values(exo, endo, h), floor)

    if b == 0:
        return GreedyPolicy(fitted_q(d, fclass, cfg, featurizer, iterations=iterations))
    q = fitted_q(
        d, fclass, cfg, featurizer, bootstrap=bootstrap, iterations=iterations
    )
    return MaskedGreedyPolicy(
        q, density, b, floor=floor, tie_rng=RngStream(cfg.seed, "mbs/tie")
    )
