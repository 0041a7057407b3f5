"""Choosing hyperparameters by replay or by true-environment value"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Generic, List, Sequence, TypeVar, Union

import settings
from app.libs.algos import Policy
from app.libs.core import AirSpec, Dataset, RngStream
from app.libs.envs import Environment
from app.libs.models import EndoModel
from app.utils.logging import format_table, get_logger

from .exc import SelectionError
from .jhat import j_hat
from .mc import j_true_mc

Candidate = TypeVar("Candidate")

logger = get_logger(__name__)


class SelectionMode(str, Enum):
    OFFLINE_JHAT = "offline_jhat"
    ONLINE_JTRUE = "online_jtrue"


@dataclass(frozen=True)
class OfflineSelectionContext(Generic[Candidate]):
    """What offline selection may see: the data and models, never the env

    Attributes:
        train: trains a policy from a candidate and the dataset
    """

    dataset: Dataset
    endo_model: EndoModel
    spec: AirSpec
    train: Callable[[Candidate, Dataset], Policy]
    seed: int = settings.DEFAULT_SEED


@dataclass(frozen=True)
class OnlineSelectionContext(Generic[Candidate]):
    dataset: Dataset
    train: Callable[[Candidate, Dataset], Policy]
    make_env: Callable[[], Environment]
    n_rollouts: int = 100
    seed: int = settings.DEFAULT_SEED


SelectionContext = Union[OfflineSelectionContext, OnlineSelectionContext]


@dataclass(frozen=True)
class SelectionResult(Generic[Candidate]):
    best: Candidate
    index: int
    scores: List[float]


def select_hyperparams(
    candidates: Sequence[Candidate], mode: SelectionMode, context: SelectionContext
) -> SelectionResult:
    """Trains every candidate and keeps the highest scoring one

    Offline mode scores by the replay estimate on the dataset, online mode by
    Monte Carlo returns in freshly made environments. Ties go to the earliest
    candidate.

    Raises:
        SelectionError: if there are no candidates or the context does not
            fit the mode
    """
    if not candidates:
        raise SelectionError("no candidates to select from")
    mode = SelectionMode(mode)
    expected = OnlineSelectionContext
    if mode == SelectionMode.OFFLINE_JHAT:
        expected = OfflineSelectionContext
    if not isinstance(context, expected):
        raise SelectionError(f"{mode.value} selection needs an {expected.__name__}")

    rng = RngStream(context.seed, f"select/{mode.value}")
    scores = []
    for index, candidate in enumerate(candidates):
        policy = context.train(candidate, context.dataset)
        if mode == SelectionMode.OFFLINE_JHAT:
            report = j_hat(
                policy,
                context.dataset,
                context.endo_model,
                context.spec,
                rng.child(f"candidate{index}"),
            )
            scores.append(report.j_hat)
        else:
            estimate = j_true_mc(
                policy,
                context.make_env(),
                context.n_rollouts,
                rng.child(f"candidate{index}"),
            )
            scores.append(estimate.mean)

    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    logger.info(
        "\n"
        + format_table(
            [[i, str(c), s] for i, (c, s) in enumerate(zip(candidates, scores))],
            headers=["index", "candidate", "score"],
        )
    )
    return SelectionResult(best=candidates[best], index=best, scores=scores)
