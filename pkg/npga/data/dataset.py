"""
Dataset containers and label/feature transforms.

A Dataset holds an N x K feature matrix and named label sets. Discrete
labels are stored one-hot, continuous labels as raw values and periodic
labels as raw angles in [0, period).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np

from npga.errors import InvalidInputError, InvalidLabelError, ShapeError

logger = logging.getLogger(__name__)

LabelKind = Literal["discrete", "continuous", "periodic"]


def one_hot(class_indices, num_classes: int) -> np.ndarray:
    """N integer indices -> N x M indicator matrix."""
    idx = np.asarray(class_indices)
    if idx.ndim != 1:
        raise InvalidLabelError(f"class indices must be a vector, got shape {idx.shape}")
    if idx.size and not np.all(np.equal(np.mod(idx, 1), 0)):
        raise InvalidLabelError("class indices must be integers")
    idx = idx.astype(np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= num_classes):
        raise InvalidLabelError(f"class index out of range [0, {num_classes})")
    out = np.zeros((idx.size, num_classes))
    out[np.arange(idx.size), idx] = 1.0
    return out


@dataclass
class LabelSet:
    kind: LabelKind
    values: np.ndarray
    period: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.ndim != 2:
            raise ShapeError(f"label values must be N x M, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidLabelError("label values contain non-finite entries")
        if self.kind == "discrete":
            v = self.values
            if not (np.all((v == 0.0) | (v == 1.0)) and np.all(v.sum(axis=1) == 1.0)):
                raise InvalidLabelError("discrete label rows must be one-hot")
        elif self.kind == "periodic":
            if self.period is None or not np.isfinite(self.period) or self.period <= 0:
                raise InvalidLabelError("periodic labels need a finite positive period")
            if np.any(self.values < 0) or np.any(self.values >= self.period):
                raise InvalidLabelError(f"periodic label values must lie in [0, {self.period})")
        elif self.kind != "continuous":
            raise InvalidLabelError(f"unknown label kind: {self.kind}")

    @property
    def num_columns(self) -> int:
        return self.values.shape[1]

    def class_indices(self) -> np.ndarray:
        if self.kind != "discrete":
            raise InvalidLabelError("class indices exist only for discrete labels")
        return np.argmax(self.values, axis=1)

    def take(self, indices) -> "LabelSet":
        return LabelSet(self.kind, self.values[indices], self.period)


@dataclass
class Dataset:
    features: np.ndarray
    label_sets: Dict[str, LabelSet] = field(default_factory=dict)
    split: str = "train"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be N x K, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise InvalidInputError("features contain non-finite entries")
        for name, labels in self.label_sets.items():
            if labels.values.shape[0] != self.features.shape[0]:
                raise ShapeError(
                    f"label set '{name}' has {labels.values.shape[0]} rows, features have {self.features.shape[0]}"
                )

    @property
    def num_examples(self) -> int:
        return self.features.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    @property
    def label_kinds(self) -> Dict[str, str]:
        return {name: ls.kind for name, ls in self.label_sets.items()}

    @property
    def label_dims(self) -> Dict[str, int]:
        return {name: ls.num_columns for name, ls in self.label_sets.items()}

    def first_discrete(self) -> str:
        for name, ls in self.label_sets.items():
            if ls.kind == "discrete":
                return name
        raise InvalidLabelError("dataset has no discrete label set")

    def take(self, indices, split: Optional[str] = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[indices],
            label_sets={name: ls.take(indices) for name, ls in self.label_sets.items()},
            split=split or self.split,
            metadata=dict(self.metadata),
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, dict(self.label_sets), self.split, dict(self.metadata))


@dataclass
class Standardizer:
    """Per-feature affine map recorded on the training set; zero-variance columns map to 0."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        return cls(mean=features.mean(axis=0), std=features.std(axis=0))

    def transform(self, features: np.ndarray) -> np.ndarray:
        safe = np.where(self.std > 0, self.std, 1.0)
        out = (features - self.mean) / safe
        out[:, self.std == 0] = 0.0
        return out

    def inverse(self, features: np.ndarray) -> np.ndarray:
        return features * self.std + self.mean


def standardize(train: Dataset, others: Sequence[Dataset] = ()) -> Tuple[Dataset, List[Dataset], Standardizer]:
    """Standardize train features and apply the same statistics to the other splits."""
    if train.num_examples < 1:
        raise InvalidInputError("cannot standardize an empty training set")
    stats = Standardizer.fit(train.features)
    return (
        train.with_features(stats.transform(train.features)),
        [d.with_features(stats.transform(d.features)) for d in others],
        stats,
    )


def _largest_remainder(counts: np.ndarray, n: int) -> np.ndarray:
    exact = counts * n / counts.sum()
    alloc = np.floor(exact).astype(np.int64)
    remainder = n - alloc.sum()
    order = np.argsort(-(exact - alloc), kind="stable")
    alloc[order[:remainder]] += 1
    return np.minimum(alloc, counts)


def subsample(
    dataset: Dataset,
    n: int,
    seed: int,
    stratified: bool = True,
    label: Optional[str] = None,
) -> Dataset:
    """Draw n examples without replacement; stratified mode keeps class proportions within one example."""
    N = dataset.num_examples
    if n > N:
        raise InvalidInputError(f"cannot draw {n} examples from a dataset of {N}")
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    rng = np.random.default_rng(seed)
    if not stratified:
        return dataset.take(rng.permutation(N)[:n])

    classes = dataset.label_sets[label or dataset.first_discrete()].class_indices()
    labels_present, counts = np.unique(classes, return_counts=True)
    alloc = _largest_remainder(counts, n)
    chosen = []
    for cls, k in zip(labels_present, alloc):
        members = np.flatnonzero(classes == cls)
        chosen.append(rng.choice(members, size=int(k), replace=False))
    picked = np.concatenate(chosen) if chosen else np.zeros(0, dtype=np.int64)
    return dataset.take(rng.permutation(picked))


class TargetEncoder:
    """
    Turns label sets into GP/head regression targets.

    Discrete labels stay one-hot, continuous labels are standardized with
    training statistics, periodic labels become angles in radians.
    """

    def __init__(self):
        self.stats: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}

    def fit(self, train: Dataset) -> "TargetEncoder":
        for name, ls in train.label_sets.items():
            if ls.kind == "continuous":
                self.stats[name] = (ls.values.mean(axis=0), ls.values.std(axis=0))
        return self

    def encode_label(self, name: str, labels: LabelSet) -> np.ndarray:
        if labels.kind == "discrete":
            return labels.values
        if labels.kind == "periodic":
            return labels.values * (2.0 * np.pi / labels.period)
        mean, std = self.stats.get(name, (labels.values.mean(axis=0), labels.values.std(axis=0)))
        safe = np.where(std > 0, std, 1.0)
        out = (labels.values - mean) / safe
        out[:, std == 0] = 0.0
        return out

    def encode(self, dataset: Dataset) -> Dict[str, np.ndarray]:
        return {name: self.encode_label(name, ls) for name, ls in dataset.label_sets.items()}


def slice_targets(targets: Mapping[str, np.ndarray], indices) -> Dict[str, np.ndarray]:
    return {name: z[indices] for name, z in targets.items()}
