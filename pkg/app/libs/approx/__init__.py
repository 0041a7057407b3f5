"""Function approximation and optimizers behind every Q-function"""
from .approximators import (
    Approximator,
    LinearApproximator,
    MlpApproximator,
    TabularApproximator,
    approximator_from_dict,
    make_approximator,
)
from .exc import ContractError, NonFiniteError, SerializationError
from .dtos import LEARNING_RATES, FitConfig, FunctionClass, OptimizerName, QMode
from .features import Featurizer
from .optimizers import Optimizer, OptimizerState, optimizer_step
from .qfunction import QFunction
from .serialization import dumps, loads


def predict(q: QFunction, state, h: int, action: int) -> float:
    return q.predict(state, h, action)


def fit_regression(approximator: Approximator, x, actions, targets, cfg, rng=None):
    """Fits one approximator slot on (features, action, target) pairs"""
    return approximator.fit(x, actions, targets, cfg, rng)
