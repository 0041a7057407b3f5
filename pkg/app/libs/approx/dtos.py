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

from enum import Enum

from pydantic import BaseModel, field_validator

LEARNING_RATES = (0.001, 0.0003, 0.0001)


class OptimizerName(str, Enum):
    ADAM = "adam"
    RMSPROP = "rmsprop"


class FunctionClass(str, Enum):
    TABULAR = "tabular"
    LINEAR = "linear"
    MLP = "mlp"


class QMode(str, Enum):
    """How a QFunction handles the horizon step

    PER_HORIZON keeps one approximator per step, SHARED feeds h/H to a
    single approximator.
    """

    PER_HORIZON = "per_horizon"
    SHARED = "shared"


class FitConfig(BaseModel):
    """Settings of a single regression"""

    optimizer: OptimizerName = OptimizerName.ADAM
    learning_rate: float = 0.001
    batch_size: int = 128
    updates: int = 2000
    hidden: int = 128
    seed: int = 0

    @field_validator("learning_rate")
    @classmethod
    def positive_learning_rate(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("learning_rate must be positive")
        return v

    @field_validator("batch_size", "hidden")
    @classmethod
    def at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("updates")
    @classmethod
    def non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("updates must not be negative")
        return v
