from app.utils.exc import BaseAirException


class ContractError(BaseAirException):
    """Raised when a Q-function or approximator is queried outside its domain"""


class NonFiniteError(BaseAirException):
    """Raised when a target or gradient is NaN or infinite"""


class SerializationError(BaseAirException):
    """Raised when serialized weights cannot be written or read back"""
