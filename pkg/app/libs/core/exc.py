from app.utils.exc import BaseAirException


class DatasetError(BaseAirException):
    """Raised when a dataset is structurally unusable"""


class EmptyDatasetError(DatasetError):
    """Raised when an operation needs at least one episode"""


class DatasetParseError(DatasetError):
    """Raised when a dataset or metadata file cannot be parsed"""

    def __init__(self, message: str = "", line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.reason = message
        self.line = line

    def __reduce__(self):
        return self.__class__, (self.reason, self.line)
