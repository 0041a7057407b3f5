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
"""Reading and writing datasets as CSV with a key=value metadata side file"""
import re
from os import PathLike
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError
from starlette.config import Config

from .dtos import Dataset, DatasetMeta, EndoKind, episode_from_arrays
from .exc import DatasetParseError

_META_KEYS = (
    "env",
    "policy",
    "eps_air",
    "seed",
    "H",
    "n_actions",
    "exo_dim",
    "endo_kind",
    "endo_dim",
)
_RAGGED_ROW_PATTERN = re.compile(r"line (\d+)")


def meta_path_for(path: Union[str, PathLike]) -> Path:
    """The metadata file that sits next to the given dataset file"""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta")


def format_float(value: float) -> str:
    """The shortest decimal that reads back as the same 64-bit double"""
    return repr(float(value))


def expected_header(exo_dim: int, endo_dim: int) -> List[str]:
    return [
        "episode",
        "h",
        *(f"exo_{i}" for i in range(exo_dim)),
        *(f"endo_{i}" for i in range(endo_dim)),
        "action",
        "reward",
    ]


def write_dataset(d: Dataset, path: Union[str, PathLike]):
    """Writes the dataset as CSV, one row per step, plus its metadata file

    Episodes with a recorded final state get an extra row with h = H whose
    action and reward cells are empty.

    Args:
        d: the dataset to write
        path: the path of the CSV file
    """
    path = Path(path)
    meta = d.meta
    is_int = meta.endo_kind == EndoKind.INT
    format_endo: Callable = (lambda v: str(int(v))) if is_int else format_float

    rows = []
    for i, episode in enumerate(d.episodes):
        for h, step in enumerate(episode.steps):
            rows.append(
                [
                    str(i),
                    str(h),
                    *(format_float(v) for v in step.state.exo),
                    *(format_endo(v) for v in step.state.endo_vector()),
                    str(int(step.action)),
                    format_float(step.reward),
                ]
            )
        if episode.final_state is not None:
            final = episode.final_state
            rows.append(
                [
                    str(i),
                    str(len(episode.steps)),
                    *(format_float(v) for v in final.exo),
                    *(format_endo(v) for v in final.endo_vector()),
                    "",
                    "",
                ]
            )

    header = expected_header(meta.exo_dim, meta.endo_dim)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=header, dtype=str).to_csv(path, index=False)
    write_meta(meta, meta_path_for(path))


def write_table(
    rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: Union[str, PathLike]
):
    """Writes result rows as CSV with the given column order

    Floats are written with format_float so that equal results give equal bytes.
    """
    cells = [
        [
            format_float(row[c])
            if isinstance(row[c], (float, np.floating))
            else str(row[c])
            for c in columns
        ]
        for row in rows
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(cells, columns=list(columns), dtype=str).to_csv(path, index=False)


def write_meta(meta: DatasetMeta, path: Union[str, PathLike]):
    """Writes the metadata as key=value lines"""
    values = meta.model_dump()
    values["eps_air"] = format_float(meta.eps_air)
    values["endo_kind"] = meta.endo_kind.value
    lines = [f"{key}={values[key]}" for key in _META_KEYS]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_meta(path: Union[str, PathLike]) -> DatasetMeta:
    """Reads a key=value metadata file

    Raises:
        DatasetParseError: if the file is missing, lacks a key or holds invalid values
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetParseError(f"metadata file not found: {path}")

    meta_config = Config(path, environ={})
    try:
        values = {key: meta_config(key, cast=str) for key in _META_KEYS[:-1]}
        values["endo_dim"] = meta_config("endo_dim", cast=str, default="1")
        return DatasetMeta(**values)
    except KeyError as exp:
        raise DatasetParseError(f"{path.name}: {exp.args[0]}")
    except ValidationError as exp:
        raise DatasetParseError(f"{path.name}: {exp}")


def read_dataset(path: Union[str, PathLike]) -> Dataset:
    """Reads a dataset written by write_dataset

    Args:
        path: the path of the CSV file; its metadata file must sit next to it

    Returns:
        the dataset

    Raises:
        DatasetParseError: on a malformed header, ragged rows or non-numeric cells,
            naming the offending line
    """
    meta = read_meta(meta_path_for(path))
    df = _read_raw_csv(path)
    _check_header(list(df.columns), meta)

    ragged = df.isna().any(axis=1)
    if ragged.any():
        raise DatasetParseError("ragged row", line=_line_of(ragged.idxmax()))

    is_terminal = (df["action"] == "") & (df["reward"] == "")
    exo_cols = [f"exo_{i}" for i in range(meta.exo_dim)]
    endo_cols = [f"endo_{i}" for i in range(meta.endo_dim)]
    cast_endo = int if meta.endo_kind == EndoKind.INT else float

    episode_ids = _parse_column(df, "episode", int)
    steps = _parse_column(df, "h", int)
    exo = [_parse_column(df, col, float) for col in exo_cols]
    endo = [_parse_column(df, col, cast_endo) for col in endo_cols]
    actions = _parse_column(df, "action", int, skip=is_terminal)
    rewards = _parse_column(df, "reward", float, skip=is_terminal)

    grouped: Dict[int, Dict[str, list]] = {}
    for row in range(len(df)):
        ep = grouped.setdefault(
            episode_ids[row], {"rows": [], "final": None, "first_line": row}
        )
        exo_row = [col[row] for col in exo]
        endo_row = [col[row] for col in endo]
        if is_terminal.iloc[row]:
            ep["final"] = (steps[row], exo_row, endo_row, _line_of(row))
        else:
            ep["rows"].append(
                (steps[row], exo_row, endo_row, actions[row], rewards[row])
            )

    episodes = []
    for key in sorted(grouped):
        ep = grouped[key]
        records = sorted(ep["rows"], key=lambda r: r[0])
        for expected_h, record in enumerate(records):
            if record[0] != expected_h:
                raise DatasetParseError(
                    f"episode {key}: missing step {expected_h}",
                    line=_line_of(ep["first_line"]),
                )
        final_exo, final_endo = None, None
        if ep["final"] is not None:
            final_h, final_exo, final_endo, line = ep["final"]
            if final_h != len(records):
                raise DatasetParseError(
                    f"episode {key}: final row at h={final_h}, expected {len(records)}",
                    line=line,
                )
        episodes.append(
            episode_from_arrays(
                exo=[r[1] for r in records],
                endo=[r[2] for r in records],
                actions=[r[3] for r in records],
                rewards=[r[4] for r in records],
                kind=meta.endo_kind,
                final_exo=final_exo,
                final_endo=final_endo,
            )
        )

    return Dataset(episodes=tuple(episodes), meta=meta)


def _read_raw_csv(path: Union[str, PathLike]) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DatasetParseError("malformed header: empty file", line=1)
    except pd.errors.ParserError as exp:
        match = _RAGGED_ROW_PATTERN.search(str(exp))
        line = int(match.group(1)) if match else 0
        raise DatasetParseError("ragged row", line=line)


def _check_header(columns: List[str], meta: DatasetMeta):
    expected = expected_header(meta.exo_dim, meta.endo_dim)
    missing = [col for col in expected if col not in columns]
    if missing:
        raise DatasetParseError(
            f"malformed header: missing column {missing[0]!r}", line=1
        )
    if columns != expected:
        raise DatasetParseError(
            f"malformed header: expected {','.join(expected)}", line=1
        )


def _parse_column(
    df: pd.DataFrame, column: str, cast: Callable, skip: pd.Series = None
) -> list:
    """Parses a column of text cells, naming the line of the first bad cell"""
    parsed = []
    for row, cell in enumerate(df[column].tolist()):
        if skip is not None and skip.iloc[row]:
            parsed.append(None)
            continue
        try:
            parsed.append(cast(cell))
        except (TypeError, ValueError):
            raise DatasetParseError(
                f"non-numeric value {cell!r} in column {column!r}", line=_line_of(row)
            )
    return parsed


def _line_of(row: int) -> int:
    # the header is line 1
    return int(row) + 2
