# This code is part of fqi-air
#
# (C) Copyright fqi-air contributors 2026
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Utilities for logging"""
import logging
from os import PathLike
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import tabulate

import settings

_DEFAULT_FORMAT = "[%(filename)s:%(lineno)s - %(funcName)20s() ] %(message)s"


def get_logger(name: str = "app") -> logging.Logger:
    """Retrieves a logger configured with the default format and level

    Args:
        name: the name of the logger, usually the __name__ of the calling module

    Returns:
        the logger
    """
    logger = logging.getLogger(name)
    logging.basicConfig(format=_DEFAULT_FORMAT)
    logger.setLevel(settings.LOG_LEVEL)
    return logger


def format_table(rows: Iterable[Sequence[Any]], headers: Sequence[str]) -> str:
    """Renders rows as a plain-text table"""
    return tabulate.tabulate(list(rows), list(headers), tablefmt="simple")


def progress_disabled() -> bool:
    """Whether tqdm progress bars should be hidden"""
    return settings.APP_SETTINGS == "test" or not settings.SHOW_PROGRESS


class RunLogger:
    """Logger writing the log of a single experiment run into its output folder

    Timestamps are left out of the file so that repeated runs with the same
    seed produce identical logs.

    Attributes:
        folder: the folder where the log file is written
        logger: the underlying logger
    """

    def __init__(
        self,
        folder: Union[str, PathLike],
        /,
        *,
        name: str = "run",
        formatter=logging.Formatter("%(levelname)s ▪ %(message)s"),
    ):
        self.folder = Path(folder)
        self.folder.mkdir(parents=True, exist_ok=True)
        self.logger = self.make_logger(
            f"{__name__}.{name}.{self.folder.resolve()}", self.folder, formatter
        )
        self.logger.propagate = False

    def warning(self, message, /, **kwargs):
        """Log a message at the warning level."""
        self.logger.warning(message, **kwargs)

    def error(self, message, /, **kwargs):
        """Log a message at the error level."""
        self.logger.error(message, **kwargs)

    def info(self, message, /, **kwargs):
        """Log a message at the info level."""
        self.logger.info(message, **kwargs)

    def table(
        self,
        title: str,
        rows: Iterable[Sequence[Any]],
        headers: Sequence[str],
        /,
    ):
        """Log a table of rows under the given title"""
        self.info(f"{title}:\n{format_table(rows, headers)}")

    def close(self):
        """Release the file handles held by this logger"""
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    @staticmethod
    def make_logger(
        name: str, output_folder: Path, formatter: logging.Formatter, /
    ) -> logging.Logger:
        """Create a logger whose only handler appends to the run log file.

        The file is named after settings.RUN_LOG_FILENAME and lives in the
        output folder.
        """
        logger = logging.getLogger(name)
        logger.setLevel(logging.INFO)
        file_handler = logging.FileHandler(
            output_folder / settings.RUN_LOG_FILENAME, mode="w", encoding="utf-8"
        )
        file_handler.setFormatter(formatter)

        if logger.hasHandlers():
            logger.handlers.clear()

        logger.addHandler(file_handler)
        return logger
