"""Ingestion of recorded exogenous series"""
from os import PathLike
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from .exc import SeriesParseError, SeriesTooShortError


def load_exo_series_csv(
    path: Union[str, PathLike],
    window: int,
    horizon: int = 100,
    stride: Optional[int] = None,
) -> List[np.ndarray]:
    """Cuts a numeric CSV series into exogenous trajectories

    The exogenous vector at time t is the window of rows t-K+1..t, flattened
    when the file has several columns. Every trajectory holds H+1 vectors,
    the last one being the state after the final action; trajectories start
    every stride vectors and incomplete remainders are dropped. Values are
    not normalized.

    Args:
        path: the CSV file, with a header row
        window: the number of rows K in each exogenous vector
        horizon: the episode length H
        stride: the distance between episode starts, defaults to H

    Returns:
        a list of (H+1, K * n_columns) arrays

    Raises:
        SeriesParseError: if a cell is not numeric
        SeriesTooShortError: if the series has fewer than K + H rows
    """
    stride = stride or horizon
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    values = np.empty(df.shape, dtype=float)
    for col, name in enumerate(df.columns):
        for row, cell in enumerate(df[name].tolist()):
            try:
                values[row, col] = float(cell)
            except (TypeError, ValueError):
                raise SeriesParseError(
                    f"non-numeric value {cell!r} in column {name!r}", line=row + 2
                )

    if len(values) < window + horizon:
        raise SeriesTooShortError("series too short")

    vectors = np.stack(
        [
            values[t - window + 1 : t + 1].reshape(-1)
            for t in range(window - 1, len(values))
        ]
    )
    episodes = []
    for start in range(0, len(vectors) - horizon, stride):
        episodes.append(vectors[start : start + horizon + 1])
    return episodes
