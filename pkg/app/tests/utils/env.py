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
from os import environ

TEST_STORAGE_ROOT = "/tmp/fqi-air-tests"
TEST_DEFAULT_SEED = 0
TEST_MAX_WORKERS = 2
TEST_RUN_LOG_FILENAME = "log.txt"


def setup_test_env():
    """Sets up the test environment.

    It should be run before any imports
    """
    environ["APP_SETTINGS"] = "test"
    environ["STORAGE_ROOT"] = TEST_STORAGE_ROOT
    environ["LOG_LEVEL"] = "WARNING"
    environ["SHOW_PROGRESS"] = "False"
    environ["DEFAULT_SEED"] = f"{TEST_DEFAULT_SEED}"
    environ["MAX_WORKERS"] = f"{TEST_MAX_WORKERS}"
    environ["RUN_LOG_FILENAME"] = TEST_RUN_LOG_FILENAME
