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

from pathlib import Path

import setuptools

_ROOT_DIRECTORY = Path(__file__).parent

with open(_ROOT_DIRECTORY / "requirements.txt", mode="r") as _f:
    _ALL_REQUIREMENTS = [line.strip() for line in _f.readlines()]

    # runtime dependencies end where the dev-dependencies start
    _DEV_DEPS_START = len(_ALL_REQUIREMENTS)
    try:
        _DEV_DEPS_START = _ALL_REQUIREMENTS.index("# dev-dependencies")
    except ValueError:
        pass

    REQUIREMENTS = [
        line for line in _ALL_REQUIREMENTS[:_DEV_DEPS_START] if not line.startswith("#")
    ]
    DEV_REQUIREMENTS = _ALL_REQUIREMENTS[_DEV_DEPS_START + 1 :]

_README = (_ROOT_DIRECTORY / "README.md").read_text()


setuptools.setup(
    name="fqi-air",
    version="2026.10.0",
    author="fqi-air contributors",
    description="Offline reinforcement learning and policy evaluation under action impact regularity",
    long_description=_README,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["examples", "examples.*"]),
    python_requires=">=3.9",
    include_package_data=True,
    license="Apache 2.0",
    install_requires=REQUIREMENTS,
    extras_require={"dev": DEV_REQUIREMENTS},
    entry_points={"console_scripts": ["fqi-air=app.cli.main:run"]},
    classifiers=[
        "Programming Language :: Python :: 3.9",
        "Operating System :: OS Independent",
    ],
)
