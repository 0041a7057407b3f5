from enum import Enum

from pydantic import field_validator

from app.libs.approx import FitConfig

EXPLORATION_EPSILON = 0.1


class AgentKind(str, Enum):
    Q_LEARNING = "q_learning"
    APPROXIMATE_POLICY_ITERATION = "api"


class SampledFqiConfig(FitConfig):
    """Settings of the sampled variant: K outer iterations of M updates on
    mini-batches of batch_size transitions"""

    iterations: int = 100
    updates_per_iteration: int = 20

    @field_validator("iterations", "updates_per_iteration")
    @classmethod
    def not_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must not be negative")
        return v
