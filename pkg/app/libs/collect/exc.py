from app.utils.exc import BaseAirException


class CollectError(BaseAirException):
    pass


class UnknownPolicyError(CollectError):
    """Raised for behavior policies no environment defines"""
