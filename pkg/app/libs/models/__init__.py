"""Endogenous, dynamics and empirical exogenous models"""
from .dynamics import DynamicsKind, DynamicsModel, fit_dynamics_model
from .empirical import (
    ExoKernel,
    build_replay_mdp,
    empirical_exo_mdp,
    initial_distribution,
)
from .endo import (
    EndoFitReport,
    EndoModel,
    ExactEndoModel,
    LearnedEndoModel,
    TabularEndoModel,
    endo_step,
    exact_endo_model,
    fit_endo_model,
    one_hot_on_grid,
    to_endo_domain,
)
from .exc import ModelError, ModelNotFittedError
