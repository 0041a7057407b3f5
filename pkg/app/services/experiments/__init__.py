"""Experiment harness: training dispatch, figure grids and sweeps"""
from .dtos import (
    AlgoName,
    EndoModelKind,
    FigureId,
    ReproduceConfig,
    SweepConfig,
    TrainConfig,
)
from .exc import ConfigError, ExperimentError, OutputDirError, UnknownFigureError
from .service import (
    prepare_out_dir,
    reproduce_figure,
    run_jobs,
    run_sweep,
    runs_for_scale,
    summarize_curves,
    summarize_eval_error,
)
from .training import (
    build_env,
    env_for_dataset,
    instance_rng,
    resolve_behavior,
    spec_for,
    train_policy,
)
from .workers import candidate_configs
