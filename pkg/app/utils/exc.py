"""The root of the exceptions raised by fqi-air"""


class BaseAirException(Exception):
    """An error with a human-readable message

    The message is passed to Exception so that errors raised in worker
    processes come back with their message.
    """

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __repr__(self):
        return f"{self.__class__.__name__}: {self.message}"

    def __str__(self):
        return self.message or self.__class__.__name__
