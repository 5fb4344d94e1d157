"""
Dataset ingestion, label encoding and synthetic data.

Example usage:
    from npga.data import load_delimited, synth_multifactor, standardize
"""

from .dataset import (
    Dataset,
    LabelSet,
    Standardizer,
    TargetEncoder,
    one_hot,
    slice_targets,
    standardize,
    subsample,
)
from .loaders import load_delimited, read_delimited_dataset, write_delimited_dataset
from .norb import load_norb, norb_paths, write_norb
from .synth import nearest_template_accuracy, synth_multifactor

__all__ = [
    "Dataset",
    "LabelSet",
    "Standardizer",
    "TargetEncoder",
    "load_delimited",
    "load_norb",
    "nearest_template_accuracy",
    "norb_paths",
    "one_hot",
    "read_delimited_dataset",
    "slice_targets",
    "standardize",
    "subsample",
    "synth_multifactor",
    "write_delimited_dataset",
    "write_norb",
]
