from app.utils.exc import BaseAirException


class AlgorithmError(BaseAirException):
    """Raised when an algorithm cannot run on the given inputs"""


class BatchTooLargeError(AlgorithmError):
    """Raised when a mini-batch exceeds the number of recorded transitions"""
