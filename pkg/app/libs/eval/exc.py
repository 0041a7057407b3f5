from app.utils.exc import BaseAirException


class EvalError(BaseAirException):
    pass


class BoundParameterError(EvalError):
    """Raised when a bound is asked for with out-of-range parameters"""


class SelectionError(EvalError):
    """Raised when hyperparameter selection cannot run"""
