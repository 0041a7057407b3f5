"""Benchmark environments, tabular AIR MDPs and exogenous series ingestion"""
from typing import Tuple

from app.libs.core import FactoredState, RngStream

from .base import Environment
from .exc import (
    EnvError,
    InvalidMdpError,
    SeriesParseError,
    SeriesTooShortError,
    UnknownEnvError,
)
from .inventory import InventoryEnv
from .order_execution import ArmaParams, OrderExecEnv
from .registry import ENV_CLASSES, SIMULATED_ENV_IDS, get_env_class, make_env
from .series import load_exo_series_csv
from .tabular import (
    TabularAirEnv,
    TabularMdp,
    make_random_tabular_air_mdp,
    measure_air_epsilon,
    perturb_endo_kernel,
    sample_rows,
)


def arma_exo_step(env: OrderExecEnv, sold_positive: bool, rng: RngStream) -> float:
    """Advances the latent price process of the environment by one step"""
    return env.arma_exo_step(sold_positive, rng)


def order_exec_transition(
    env: OrderExecEnv, state: FactoredState, action: int, rng: RngStream
) -> Tuple[FactoredState, float]:
    return env.transition(state, action, rng)


def inventory_transition(
    env: InventoryEnv, state: FactoredState, action: int, rng: RngStream
) -> Tuple[FactoredState, float]:
    return env.transition(state, action, rng)
