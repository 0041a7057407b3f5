"""Domain types, datasets and random streams shared by every library module"""
from .dataset import split_dataset, validate_dataset
from .dtos import (
    AirSpec,
    Dataset,
    DatasetMeta,
    EndoKind,
    Episode,
    EpisodeStep,
    FactoredState,
    TransitionBatch,
    episode_from_arrays,
)
from .exc import DatasetError, DatasetParseError, EmptyDatasetError
from .rng import RngStream
from .storage import (
    format_float,
    meta_path_for,
    read_dataset,
    read_meta,
    write_dataset,
    write_meta,
    write_table,
)
