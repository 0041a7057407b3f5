from app.utils.exc import BaseAirException


class ExperimentError(BaseAirException):
    pass


class UnknownFigureError(ExperimentError):
    """Raised for figure ids the harness does not know"""


class OutputDirError(ExperimentError):
    """Raised when an output directory cannot be created or written"""


class ConfigError(ExperimentError):
    """Raised for unreadable config files or unknown keys"""
