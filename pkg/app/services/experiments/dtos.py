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
"""Configuration objects of training runs and experiment harnesses"""
from enum import Enum
from os import PathLike
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import toml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator
from starlette.config import Config

import settings
from app.libs.algos import AgentKind, SampledFqiConfig
from app.libs.approx import LEARNING_RATES, FitConfig, FunctionClass, OptimizerName

from .exc import ConfigError


class FigureId(str, Enum):
    SIM_EPS0 = "sim_eps0"
    SIM_EPS_LARGE = "sim_eps_large"
    EVAL_ERROR = "eval_error"
    TRAJ_SIM = "traj_sim"


class AlgoName(str, Enum):
    FQI_AIR = "fqi-air"
    FQI_AIR_SAMPLED = "fqi-air-sampled"
    FQI = "fqi"
    MBS = "mbs"
    MB_EMPIRICAL = "mb-empirical"
    MB_EXO = "mb-exo"
    MB_FULL = "mb-full"
    TRAJ_SIM = "traj-sim"


class EndoModelKind(str, Enum):
    EXACT = "exact"
    LEARNED = "learned"


class TrainConfig(BaseModel):
    """Settings of one training run, read from key=value files

    Attributes:
        fclass: the function class of the Q-function
        lr: the learning rate of neural function classes
        optimizer: adam or rmsprop
        updates: mini-batch updates per regression
        iterations: backward passes of neural FQI, FQI-AIR and MBS-QI, and
            the iterations of the trajectory simulator
        b: the density threshold of MBS-QI
        B: the mini-batch size
        K: outer iterations of the sampled variant
        M: updates per outer iteration of the sampled variant
        endo_sweep_max: the largest swept endogenous value
        zeta: the failure probability of reported bounds
        endo_model: whether algorithms use the exact or a learned endo model
    """

    model_config = ConfigDict(extra="forbid")

    fclass: FunctionClass = FunctionClass.MLP
    lr: float = 0.001
    optimizer: OptimizerName = OptimizerName.ADAM
    updates: int = 2000
    hidden: int = 128
    iterations: int = 100
    b: float = 0.001
    B: int = 128
    K: int = 100
    M: int = 20
    endo_sweep_max: Optional[float] = None
    zeta: float = settings.DEFAULT_ZETA
    seed: int = settings.DEFAULT_SEED
    agent: AgentKind = AgentKind.Q_LEARNING
    endo_model: EndoModelKind = EndoModelKind.EXACT
    bins: int = 10

    @field_validator("zeta")
    @classmethod
    def zeta_in_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("zeta must lie in (0, 1)")
        return v

    @classmethod
    def from_file(cls, path: Union[str, PathLike]) -> "TrainConfig":
        """Reads key=value lines, rejecting keys that are not fields

        Raises:
            ConfigError: if the file is missing, holds unknown keys or invalid values
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        file_config = Config(path, environ={})
        unknown = sorted(set(file_config.file_values) - set(cls.model_fields))
        if unknown:
            raise ConfigError(f"{path.name}: unknown key {unknown[0]!r}")
        try:
            return cls(**{key: file_config(key) for key in file_config.file_values})
        except ValidationError as exp:
            raise ConfigError(f"{path.name}: {exp}")

    def fit_config(self) -> FitConfig:
        return FitConfig(
            optimizer=self.optimizer,
            learning_rate=self.lr,
            batch_size=self.B,
            updates=self.updates,
            hidden=self.hidden,
            seed=self.seed,
        )

    def sampled_config(self) -> SampledFqiConfig:
        return SampledFqiConfig(
            **self.fit_config().model_dump(),
            iterations=self.K,
            updates_per_iteration=self.M,
        )


def _load_toml(path: Union[str, PathLike], section: str) -> Dict[str, Any]:
    try:
        data = toml.load(path)
    except (FileNotFoundError, toml.TomlDecodeError) as exp:
        raise ConfigError(f"cannot read {path}: {exp}")
    return data.get(section, data)


class ReproduceConfig(BaseModel):
    """Grids and sizes of the figure harness"""

    model_config = ConfigDict(extra="forbid")

    envs: List[str] = ["order", "inventory"]
    behaviors: List[str] = ["random", "constant", "learned"]
    algos: List[AlgoName] = [AlgoName.FQI_AIR, AlgoName.FQI, AlgoName.MBS]
    n_grid: List[int] = [1, 5, 10, 25, 50, 100, 200]
    eval_n_grid: List[int] = [1, 5, 25, 100, 200]
    eps_grid: List[float] = [0.0, 0.05, 0.1, 0.2, 0.4]
    eps_large: float = 0.8
    runs: int = 30
    horizon: Optional[int] = None
    fclass: FunctionClass = FunctionClass.MLP
    learning_rates: List[float] = list(LEARNING_RATES)
    optimizers: List[OptimizerName] = [OptimizerName.ADAM, OptimizerName.RMSPROP]
    mbs_thresholds: List[float] = [0.002, 0.001, 0.0001, 0.00005]
    updates: int = 200
    hidden: int = 128
    batch_size: int = 128
    fqi_iterations: int = 100
    collector_episodes: int = 1000
    eval_rollouts: int = 100
    traj_sim_n: int = 100
    traj_sim_iterations: int = 100
    traj_sim_agents: List[AgentKind] = [
        AgentKind.Q_LEARNING,
        AgentKind.APPROXIMATE_POLICY_ITERATION,
    ]
    traj_sim_fclass: FunctionClass = FunctionClass.MLP
    sampled_updates: int = 20

    @field_validator("runs", "eval_rollouts", "traj_sim_n", "fqi_iterations")
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("n_grid", "eval_n_grid")
    @classmethod
    def positive_sizes(cls, v: List[int]) -> List[int]:
        if not v or min(v) < 1:
            raise ValueError("dataset sizes must be at least 1")
        return v

    @field_validator("learning_rates", "optimizers")
    @classmethod
    def non_empty(cls, v: list) -> list:
        if not v:
            raise ValueError("the grid must not be empty")
        return v

    @classmethod
    def from_toml(cls, file: Union[str, PathLike]) -> "ReproduceConfig":
        """Creates a ReproduceConfig from the [reproduce] table of a TOML file"""
        try:
            return cls(**_load_toml(file, "reproduce"))
        except ValidationError as exp:
            raise ConfigError(f"{Path(file).name}: {exp}")

    def train_config(
        self,
        seed: int,
        lr: Optional[float] = None,
        optimizer: Optional[OptimizerName] = None,
        **changes,
    ) -> TrainConfig:
        return TrainConfig(
            fclass=self.fclass,
            lr=lr if lr is not None else self.learning_rates[0],
            optimizer=optimizer if optimizer is not None else self.optimizers[0],
            updates=self.updates,
            iterations=self.fqi_iterations,
            hidden=self.hidden,
            B=self.batch_size,
            seed=seed,
            **changes,
        )


class SweepConfig(BaseModel):
    """A grid of (algorithm, N, run) training jobs on one environment"""

    model_config = ConfigDict(extra="forbid")

    env: str = "order"
    eps_air: float = 0.0
    behavior: str = "random"
    algos: List[AlgoName] = [AlgoName.FQI_AIR, AlgoName.FQI]
    n_grid: List[int] = [1, 5, 25]
    runs: int = 3
    seed: int = settings.DEFAULT_SEED
    horizon: Optional[int] = None
    eval_rollouts: int = 100
    collector_episodes: int = 1000
    train: TrainConfig = TrainConfig()

    @classmethod
    def from_toml(cls, file: Union[str, PathLike]) -> "SweepConfig":
        """Creates a SweepConfig from the [sweep] table of a TOML file"""
        try:
            return cls(**_load_toml(file, "sweep"))
        except ValidationError as exp:
            raise ConfigError(f"{Path(file).name}: {exp}")
