"""Behavior policies and dataset collection"""
from .behavior import (
    DEFAULT_N_ACTIONS,
    BehaviorKind,
    FixedRulePolicy,
    behavior_policy,
)
from .collector import ReplayBuffer, epsilon_at, train_online_collector
from .dataset import collect_dataset, collect_episode
from .exc import CollectError, UnknownPolicyError
