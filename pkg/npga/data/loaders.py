"""
Whitespace-delimited text datasets.

The oil-flow files ship as separate feature and label files; labels are
either one-hot rows or a single integer column. Datasets can also be
re-serialized to one self-describing delimited file.
"""

import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from npga.data.dataset import Dataset, LabelSet, one_hot
from npga.errors import InvalidLabelError, ParseError

logger = logging.getLogger(__name__)


def _read_numeric_rows(path: str) -> List[Tuple[int, List[float]]]:
    if not os.path.exists(path):
        raise ParseError("file does not exist", path=path)
    rows = []
    width = None
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            tokens = line.split()
            if not tokens:
                continue
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                bad = next(t for t in tokens if not _is_float(t))
                raise ParseError(f"non-numeric token '{bad}'", path=path, line=lineno)
            if not np.all(np.isfinite(values)):
                bad = next(t for t, v in zip(tokens, values) if not np.isfinite(v))
                raise ParseError(f"non-finite value '{bad}'", path=path, line=lineno)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(f"ragged row with {len(values)} columns, expected {width}", path=path, line=lineno)
            rows.append((lineno, values))
    if not rows:
        raise ParseError("no data rows", path=path)
    return rows


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _labels_from_rows(rows, path: str, num_classes: Optional[int]) -> np.ndarray:
    values = np.array([v for _, v in rows], dtype=np.float64)
    if values.shape[1] == 1:
        col = values[:, 0]
        for (lineno, _), v in zip(rows, col):
            if v != np.floor(v) or v < 0:
                raise ParseError(f"label '{v}' is not a nonnegative integer", path=path, line=lineno)
        M = num_classes if num_classes is not None else int(col.max()) + 1
        if col.max() >= M:
            bad = rows[int(np.argmax(col >= M))][0]
            raise ParseError(f"label index out of range for {M} classes", path=path, line=bad)
        return one_hot(col.astype(np.int64), M)
    for lineno, v in rows:
        arr = np.asarray(v)
        if not (np.all((arr == 0.0) | (arr == 1.0)) and arr.sum() == 1.0):
            raise ParseError("label row is not one-hot", path=path, line=lineno)
    if num_classes is not None and values.shape[1] != num_classes:
        raise InvalidLabelError(f"{path}: {values.shape[1]} one-hot columns, expected {num_classes}")
    return values


def load_delimited(
    features_path: str,
    labels_path: str,
    num_classes: Optional[int] = None,
    label_name: str = "class",
    split: str = "train",
) -> Dataset:
    """Load a whitespace-delimited feature file and its label file as a discrete-labelled Dataset."""
    feature_rows = _read_numeric_rows(features_path)
    label_rows = _read_numeric_rows(labels_path)
    if len(feature_rows) != len(label_rows):
        # report the first row of the longer file that has no partner
        if len(feature_rows) > len(label_rows):
            path, line = features_path, feature_rows[len(label_rows)][0]
        else:
            path, line = labels_path, label_rows[len(feature_rows)][0]
        raise ParseError(
            f"row count mismatch: {len(feature_rows)} feature rows vs {len(label_rows)} label rows",
            path=path,
            line=line,
        )
    features = np.array([v for _, v in feature_rows], dtype=np.float64)
    labels = _labels_from_rows(label_rows, labels_path, num_classes)
    dataset = Dataset(features, {label_name: LabelSet("discrete", labels)}, split=split)
    logger.info(f"Loaded {dataset.num_examples} x {dataset.input_dim} dataset from {features_path}")
    return dataset


def _header_for(name: str, ls: LabelSet) -> str:
    if ls.kind == "periodic":
        return f"{ls.kind}:{name}:{ls.period!r}"
    return f"{ls.kind}:{name}"


def write_delimited_dataset(dataset: Dataset, path: str) -> None:
    """
    Write one delimited file: a header row then one row per example.

    Header tokens are `kind:name[:period]` for each label column followed by
    `feature:k`; the label columns come first.
    """
    columns: Dict[str, np.ndarray] = {}
    for name, ls in dataset.label_sets.items():
        head = _header_for(name, ls)
        for m in range(ls.num_columns):
            columns[f"{head}#{m}"] = ls.values[:, m]
    for k in range(dataset.input_dim):
        columns[f"feature:{k}"] = dataset.features[:, k]
    frame = pd.DataFrame(columns)
    frame.to_csv(path, sep=" ", index=False, float_format="%.17g")


def read_delimited_dataset(path: str, split: str = "train") -> Dataset:
    """Inverse of write_delimited_dataset."""
    if not os.path.exists(path):
        raise ParseError("file does not exist", path=path)
    frame = pd.read_csv(path, sep=" ", dtype=np.float64, float_precision="round_trip")
    groups: Dict[Tuple[str, str, Optional[float]], List[str]] = {}
    feature_cols = []
    for col in frame.columns:
        if col.startswith("feature:"):
            feature_cols.append(col)
            continue
        head = col.split("#", 1)[0]
        parts = head.split(":")
        if len(parts) < 2:
            raise ParseError(f"malformed header token '{col}'", path=path, line=1)
        period = float(parts[2]) if len(parts) > 2 else None
        groups.setdefault((parts[0], parts[1], period), []).append(col)
    label_sets = {
        name: LabelSet(kind, frame[cols].to_numpy(), period) for (kind, name, period), cols in groups.items()
    }
    return Dataset(frame[feature_cols].to_numpy(), label_sets, split=split)
