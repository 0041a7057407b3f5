"""Feature maps from factored states to approximator inputs"""
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from app.libs.envs import Environment, get_env_class


@dataclass(frozen=True)
class Featurizer:
    """Scales exo and endo values into unit range, optionally appending h/H"""

    exo_scale: Tuple[float, ...]
    endo_scale: Tuple[float, ...]
    horizon: int
    append_horizon: bool = False

    @classmethod
    def for_env(cls, env: Environment, append_horizon: bool = False) -> "Featurizer":
        return cls(
            exo_scale=tuple(env.exo_scale),
            endo_scale=tuple(env.endo_scale),
            horizon=env.horizon,
            append_horizon=append_horizon,
        )

    @classmethod
    def for_env_id(
        cls, env_id: str, horizon: int, exo_dim: Optional[int] = None
    ) -> "Featurizer":
        env_class = get_env_class(env_id)
        exo_scale = tuple(env_class.exo_scale)
        if exo_dim is not None and len(exo_scale) != exo_dim:
            exo_scale = (exo_scale[0],) * exo_dim
        return cls(
            exo_scale=exo_scale, endo_scale=tuple(env_class.endo_scale), horizon=horizon
        )

    @property
    def n_features(self) -> int:
        return len(self.exo_scale) + len(self.endo_scale) + int(self.append_horizon)

    def with_horizon(self, append_horizon: bool = True) -> "Featurizer":
        return replace(self, append_horizon=append_horizon)

    def transform(
        self,
        exo: np.ndarray,
        endo: np.ndarray,
        h: Union[int, np.ndarray, None] = None,
    ) -> np.ndarray:
        """(n, n_features) inputs for rows of exo (n, k) and endo (n, m) values"""
        exo = np.asarray(exo, dtype=float)
        endo = np.asarray(endo, dtype=float)
        parts = [exo * np.asarray(self.exo_scale), endo * np.asarray(self.endo_scale)]
        if self.append_horizon:
            steps = np.broadcast_to(np.asarray(h, dtype=float), (exo.shape[0],))
            parts.append((steps / self.horizon)[:, None])
        return np.concatenate(parts, axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Featurizer":
        return cls(
            exo_scale=tuple(data["exo_scale"]),
            endo_scale=tuple(data["endo_scale"]),
            horizon=int(data["horizon"]),
            append_horizon=bool(data["append_horizon"]),
        )
