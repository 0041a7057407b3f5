from app.utils.exc import BaseAirException


class ModelError(BaseAirException):
    """Raised when a model cannot answer a query"""


class ModelNotFittedError(ModelError):
    """Raised when a learned model is queried before it is fitted"""
