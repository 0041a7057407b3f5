from app.utils.exc import BaseAirException


class EnvError(BaseAirException):
    """Raised when an environment is misused"""


class UnknownEnvError(EnvError):
    """Raised for an environment id with no registered environment"""


class InvalidMdpError(EnvError):
    """Raised when a tabular MDP breaks a shape or normalization invariant"""


class SeriesTooShortError(EnvError):
    """Raised when an exogenous series cannot fill a single episode"""


class SeriesParseError(EnvError):
    """Raised when an exogenous series file holds a non-numeric cell"""

    def __init__(self, message: str = "", line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.reason = message
        self.line = line

    def __reduce__(self):
        return self.__class__, (self.reason, self.line)
