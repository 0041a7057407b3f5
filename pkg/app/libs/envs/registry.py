"""Lookup of environments by id"""
from typing import Dict, Type

from app.libs.core import RngStream

from .base import Environment
from .exc import UnknownEnvError
from .inventory import InventoryEnv
from .order_execution import OrderExecEnv
from .tabular import TabularAirEnv

ENV_CLASSES: Dict[str, Type[Environment]] = {
    OrderExecEnv.env_id: OrderExecEnv,
    InventoryEnv.env_id: InventoryEnv,
    TabularAirEnv.env_id: TabularAirEnv,
}

SIMULATED_ENV_IDS = (OrderExecEnv.env_id, InventoryEnv.env_id)


def get_env_class(env_id: str) -> Type[Environment]:
    try:
        return ENV_CLASSES[env_id]
    except KeyError:
        raise UnknownEnvError(f"unknown environment {env_id!r}")


def make_env(
    env_id: str, eps_air: float = 0.0, rng: RngStream = None, **kwargs
) -> Environment:
    """Instantiates one of the simulated environments

    Args:
        env_id: "order" or "inventory"
        eps_air: the action impact probability
        rng: the stream drawing instance parameters such as the ARMA coefficients
        kwargs: extra keyword arguments for the environment

    Raises:
        UnknownEnvError: for ids other than the simulated environments
    """
    if env_id not in SIMULATED_ENV_IDS:
        raise UnknownEnvError(f"unknown environment {env_id!r}")
    if env_id == OrderExecEnv.env_id:
        return OrderExecEnv(eps_air=eps_air, rng=rng, **kwargs)
    return InventoryEnv(eps_air=eps_air, rng=rng, **kwargs)
