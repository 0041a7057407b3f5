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

import os
from pathlib import Path

from starlette.config import Config

# NOTE: shell env variables take precedence over the configuration file
env_file = os.environ.get("ENV_FILE", default=".env")
config = Config(Path(__file__).parent / env_file, environ=os.environ)

# Automatic root directory settings
APP_ROOT_DIR = Path(__file__).parent / "app"
FIXTURES_DIR = Path(__file__).parent / "app" / "tests" / "fixtures"

# Misc settings
APP_SETTINGS = config("APP_SETTINGS", cast=str, default="production")
LOG_LEVEL = config("LOG_LEVEL", cast=str, default="INFO").upper()
SHOW_PROGRESS = config("SHOW_PROGRESS", cast=bool, default=True)

# Storage settings
STORAGE_ROOT = config("STORAGE_ROOT", cast=str, default="/tmp/fqi-air")
RUN_LOG_FILENAME = config("RUN_LOG_FILENAME", cast=str, default="log.txt")

if not os.path.exists(STORAGE_ROOT):
    os.makedirs(STORAGE_ROOT)

# Experiment settings
DEFAULT_SEED = config("DEFAULT_SEED", cast=int, default=0)
DEFAULT_ZETA = config("DEFAULT_ZETA", cast=float, default=0.05)
MAX_WORKERS = config("MAX_WORKERS", cast=int, default=os.cpu_count() or 1)

if MAX_WORKERS < 1:
    raise ValueError("'MAX_WORKERS' environment variable must be at least 1.")

if not 0.0 < DEFAULT_ZETA < 1.0:
    raise ValueError("'DEFAULT_ZETA' environment variable must lie in (0, 1).")
