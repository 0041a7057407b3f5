"""Offline policy optimization: fitted Q-iteration variants, masking and planning"""
from .dtos import EXPLORATION_EPSILON, AgentKind, SampledFqiConfig
from .exc import AlgorithmError, BatchTooLargeError
from .policies import (
    GreedyPolicy,
    LookupPolicy,
    MaskedGreedyPolicy,
    Policy,
    TabularPolicy,
    policy_from_text,
    policy_to_text,
    register_policy_kind,
)
from .rollout import replay_returns
from .fqi import (
    SyntheticSet,
    build_synthetic_set,
    featurizer_for,
    fitted_q,
    fqi_air_sampled,
    fqi_air_sweep,
    fqi_baseline,
    outer_passes,
)
from .mbs import (
    NEGATIVE_REWARD_FLOOR,
    DensityEstimate,
    density_estimate,
    masked_floor,
    mbs_qi,
)
from .planning import DpResult, backward_induction, mb_plan
from .traj_sim import CurvePoint, mean_and_stderr, traj_sim_online
