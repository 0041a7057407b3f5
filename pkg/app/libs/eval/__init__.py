"""Policy evaluation, error bounds, exact oracles and hyperparameter selection"""
from .baseline import build_baseline_mdp
from .bounds import (
    baseline_gap_bound,
    eval_bound_thm2,
    simulation_bound,
    subopt_bound_thm1,
)
from .dp import dp_solve, max_row_l1_gap, policy_matrix
from .exc import BoundParameterError, EvalError, SelectionError
from .jhat import HELDOUT_FRACTION, EvalReport, j_hat, unbiased_split
from .mc import McEstimate, j_true_mc, rollout_return
from .selection import (
    OfflineSelectionContext,
    OnlineSelectionContext,
    SelectionMode,
    SelectionResult,
    select_hyperparams,
)
