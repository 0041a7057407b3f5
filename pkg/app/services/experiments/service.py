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
"""Entry points of the figure and sweep harnesses"""
import math
import multiprocessing
import os
import traceback
from os import PathLike
from pathlib import Path
from typing import Callable, List, Optional, Sequence, TypeVar, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

import settings
from app.libs.algos import mean_and_stderr
from app.libs.core import write_table
from app.utils.logging import RunLogger, get_logger, progress_disabled

from .dtos import FigureId, ReproduceConfig, SweepConfig
from .exc import ConfigError, OutputDirError, UnknownFigureError
from .workers import (
    Row,
    SimulationJob,
    SweepJob,
    TrajSimJob,
    run_eval_error_job,
    run_simulation_job,
    run_sweep_job,
    run_traj_sim_job,
)

logger = get_logger(__name__)

Job = TypeVar("Job")

SIM_COLUMNS = ("env", "policy", "algo", "N", "run", "return")
EVAL_ERROR_COLUMNS = ("env", "eps_air", "N", "p90_abs_err")
EVAL_ERROR_RUN_COLUMNS = (
    "env",
    "eps_air",
    "policy",
    "N",
    "run",
    "j_hat",
    "j_true",
    "abs_err",
)
CURVE_COLUMNS = ("iteration", "return_mean", "return_stderr")
SWEEP_COLUMNS = ("algo", "N", "run", "j_hat", "return")


def runs_for_scale(runs: int, scale: float) -> int:
    """ceil(runs * scale), at least one

    Raises:
        ConfigError: if scale is outside (0, 1]
    """
    if not 0.0 < scale <= 1.0:
        raise ConfigError(f"scale must lie in (0, 1], got {scale}")
    # rounding first keeps 30 * 0.1 at 3 instead of 4
    return max(1, math.ceil(round(runs * scale, 9)))


def prepare_out_dir(out_dir: Union[str, PathLike]) -> Path:
    """Creates the output directory

    Raises:
        OutputDirError: if the directory cannot be created or written
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exp:
        raise OutputDirError(f"cannot create {out_dir}: {exp}")
    if not os.access(out_dir, os.W_OK):
        raise OutputDirError(f"{out_dir} is not writable")
    return out_dir


def run_jobs(
    fn: Callable[[Job], List[Row]], jobs: Sequence[Job], n_workers: int = 1
) -> List[Row]:
    """Runs the jobs and concatenates their rows in job order

    Rows come back in the order of the jobs regardless of which worker
    finishes first.
    """
    disable = progress_disabled()
    if n_workers <= 1 or len(jobs) <= 1:
        results = [fn(job) for job in tqdm(jobs, disable=disable)]
    else:
        with multiprocessing.Pool(processes=min(n_workers, len(jobs))) as pool:
            results = list(tqdm(pool.imap(fn, jobs), total=len(jobs), disable=disable))
    return [row for rows in results for row in rows]


def _simulation_jobs(
    figure: FigureId, cfg: ReproduceConfig, runs: int, seed: int
) -> List[SimulationJob]:
    eps_air = 0.0 if figure == FigureId.SIM_EPS0 else cfg.eps_large
    return [
        SimulationJob(figure, env_id, eps_air, behavior, run, seed, cfg)
        for env_id in cfg.envs
        for behavior in cfg.behaviors
        for run in range(runs)
    ]


def _eval_error_jobs(cfg: ReproduceConfig, runs: int, seed: int) -> List[SimulationJob]:
    return [
        SimulationJob(FigureId.EVAL_ERROR, env_id, eps, behavior, run, seed, cfg)
        for env_id in cfg.envs
        for eps in cfg.eps_grid
        for behavior in cfg.behaviors
        for run in range(runs)
    ]


def summarize_eval_error(rows: Sequence[Row]) -> List[Row]:
    """The 90th percentile of |j_hat - j_true| per (env, eps_air, N) cell"""
    frame = pd.DataFrame(list(rows))
    summary = []
    for (env_id, eps, n), cell in frame.groupby(["env", "eps_air", "N"], sort=False):
        summary.append(
            {
                "env": env_id,
                "eps_air": float(eps),
                "N": int(n),
                "p90_abs_err": float(np.percentile(cell["abs_err"].to_numpy(), 90)),
            }
        )
    return summary


def summarize_curves(rows: Sequence[Row]) -> List[Row]:
    """Learning curves averaged over runs

    With several runs the error bar is the standard error of the per-run
    means; a single run keeps its own standard error.
    """
    frame = pd.DataFrame(list(rows))
    summary = []
    keys = ["env", "agent", "iteration"]
    for (env_id, agent, iteration), cell in frame.groupby(keys, sort=False):
        means = cell["return_mean"].to_numpy()
        mean, stderr = mean_and_stderr(means)
        if len(means) == 1:
            stderr = float(cell["return_stderr"].iloc[0])
        summary.append(
            {
                "env": env_id,
                "agent": agent,
                "iteration": int(iteration),
                "return_mean": mean,
                "return_stderr": stderr,
            }
        )
    return summary


def _sim_summary(rows: Sequence[Row]) -> List[List]:
    frame = pd.DataFrame(list(rows))
    grouped = frame.groupby(["env", "policy", "algo", "N"], sort=False)["return"].mean()
    return [[*key, f"{value:.4g}"] for key, value in grouped.items()]


def reproduce_figure(
    figure: Union[FigureId, str],
    out_dir: Union[str, PathLike],
    scale: float = 1.0,
    seed: int = settings.DEFAULT_SEED,
    config: Optional[ReproduceConfig] = None,
    n_workers: int = 1,
) -> List[Path]:
    """Runs the experiment grid of a figure and writes its CSV files

    Args:
        figure: sim_eps0, sim_eps_large, eval_error or traj_sim
        out_dir: the folder receiving the CSV files and log.txt
        scale: shrinks the run count per cell to ceil(runs * scale)
        seed: the base seed of every job
        config: the grids and sizes, the defaults when left out
        n_workers: the number of worker processes

    Returns:
        the paths of the written CSV files

    Raises:
        UnknownFigureError: for an unknown figure id
        OutputDirError: if out_dir cannot be written
        ConfigError: if scale is outside (0, 1]
    """
    try:
        figure = FigureId(figure)
    except ValueError:
        raise UnknownFigureError(f"unknown figure {figure!r}")
    cfg = config or ReproduceConfig()
    runs = runs_for_scale(cfg.runs, scale)
    out_dir = prepare_out_dir(out_dir)

    with RunLogger(out_dir, name=figure.value) as run_logger:
        run_logger.info(
            f"figure={figure.value} scale={scale!r} seed={seed} runs={runs}"
        )
        run_logger.info(f"config={cfg.model_dump_json()}")
        try:
            paths = _reproduce(figure, out_dir, cfg, runs, seed, n_workers, run_logger)
        except Exception:
            run_logger.error(traceback.format_exc())
            raise
        run_logger.info(f"wrote {', '.join(p.name for p in paths)}")
    return paths


def _reproduce(
    figure: FigureId,
    out_dir: Path,
    cfg: ReproduceConfig,
    runs: int,
    seed: int,
    n_workers: int,
    run_logger: RunLogger,
) -> List[Path]:
    if figure in (FigureId.SIM_EPS0, FigureId.SIM_EPS_LARGE):
        jobs = _simulation_jobs(figure, cfg, runs, seed)
        rows = run_jobs(run_simulation_job, jobs, n_workers)
        path = out_dir / f"{figure.value}.csv"
        write_table(rows, SIM_COLUMNS, path)
        run_logger.table(
            "mean return", _sim_summary(rows), ["env", "policy", "algo", "N", "return"]
        )
        return [path]

    if figure == FigureId.EVAL_ERROR:
        jobs = _eval_error_jobs(cfg, runs, seed)
        rows = run_jobs(run_eval_error_job, jobs, n_workers)
        summary = summarize_eval_error(rows)
        path = out_dir / "eval_error.csv"
        runs_path = out_dir / "eval_error_runs.csv"
        write_table(summary, EVAL_ERROR_COLUMNS, path)
        write_table(rows, EVAL_ERROR_RUN_COLUMNS, runs_path)
        run_logger.table(
            "p90 of |j_hat - j_true|",
            [[r[c] for c in EVAL_ERROR_COLUMNS] for r in summary],
            EVAL_ERROR_COLUMNS,
        )
        return [path, runs_path]

    jobs = [
        TrajSimJob(env_id, run, seed, cfg)
        for env_id in cfg.envs
        for run in range(runs)
    ]
    summary = summarize_curves(run_jobs(run_traj_sim_job, jobs, n_workers))
    paths = []
    for env_id in cfg.envs:
        for agent in dict.fromkeys(r["agent"] for r in summary if r["env"] == env_id):
            path = out_dir / f"traj_sim_{env_id}_{agent}.csv"
            curve = [r for r in summary if r["env"] == env_id and r["agent"] == agent]
            write_table(curve, CURVE_COLUMNS, path)
            final = curve[-1]["return_mean"]
            run_logger.info(f"{env_id}/{agent}: final return {final:.4g}")
            paths.append(path)
    return paths


def run_sweep(
    config: SweepConfig,
    out_path: Union[str, PathLike],
    n_workers: int = 1,
) -> Path:
    """Trains and scores every (algorithm, N, run) cell of a sweep

    Raises:
        OutputDirError: if the parent folder of out_path cannot be written
    """
    out_path = Path(out_path)
    out_dir = prepare_out_dir(out_path.parent)
    jobs = [SweepJob(run, config) for run in range(config.runs)]

    with RunLogger(out_dir, name="sweep") as run_logger:
        run_logger.info(f"config={config.model_dump_json()}")
        try:
            rows = run_jobs(run_sweep_job, jobs, n_workers)
        except Exception:
            run_logger.error(traceback.format_exc())
            raise
        write_table(rows, SWEEP_COLUMNS, out_path)
        run_logger.table(
            "sweep", [[r[c] for c in SWEEP_COLUMNS] for r in rows], SWEEP_COLUMNS
        )
    logger.info(f"sweep of {len(rows)} cells written to {out_path}")
    return out_path
