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
"""Deterministic random streams keyed by a base seed and a text label"""
import hashlib
from typing import Any, Optional, Sequence

import numpy as np

_SEED_MASK = (1 << 64) - 1


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """A counter-based random stream identified by (base_seed, label)

    Two streams with the same seed and label draw identical values; streams
    with different labels are independent. A stream is stateful and must not
    be shared between workers; derive a child per worker instead.

    Attributes:
        base_seed: the 64-bit experiment seed
        label: the path-like label of the stream e.g. "collect/episode3/env"
        generator: the numpy generator backing the stream
    """

    def __init__(self, base_seed: int, label: str = ""):
        if not 0 <= int(base_seed) <= _SEED_MASK:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        self.base_seed = int(base_seed)
        self.label = label
        key = self.base_seed | (_label_key(label) << 64)
        bit_generator = np.random.Philox(key=key)
        self.generator = np.random.Generator(bit_generator)

    def __repr__(self):
        return f"RngStream(base_seed={self.base_seed}, label={self.label!r})"

    def child(self, suffix: str) -> "RngStream":
        """A fresh stream whose label extends this one's"""
        label = f"{self.label}/{suffix}" if self.label else suffix
        return RngStream(self.base_seed, label)

    def random(self, size: Any = None) -> Any:
        return self.generator.random(size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size: Any = None) -> Any:
        return self.generator.uniform(low, high, size)

    def normal(self, loc: Any = 0.0, scale: Any = 1.0, size: Any = None) -> Any:
        return self.generator.normal(loc, scale, size)

    def integers(self, low: Any, high: Any = None, size: Any = None) -> Any:
        return self.generator.integers(low, high, size=size)

    def choice(
        self,
        a: Any,
        size: Any = None,
        replace: bool = True,
        p: Optional[Sequence[float]] = None,
    ) -> Any:
        return self.generator.choice(a, size=size, replace=replace, p=p)

    def permutation(self, x: Any) -> np.ndarray:
        return self.generator.permutation(x)

    def dirichlet(self, alpha: Sequence[float], size: Any = None) -> np.ndarray:
        return self.generator.dirichlet(alpha, size)
