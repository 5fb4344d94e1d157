"""
One training run end to end: load splits, train the NPGA, probe the code.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from npga.core.objective import FEATURES_LABEL, NpgaObjective, ParamVector
from npga.core.optimizer import TrainResult, train
from npga.data.dataset import Dataset, standardize, subsample
from npga.data.loaders import load_delimited
from npga.data.norb import load_norb, norb_paths
from npga.data.synth import synth_multifactor
from npga.errors import InvalidInputError, LayoutError
from npga.evaluation.latent import hidden_features
from npga.evaluation.probe import fit_probe, probe_accuracy
from npga.models import CgOptions, DataConfig, ModelConfig, ProbeConfig, RunConfig

logger = logging.getLogger(__name__)

SPLIT_KEYS = {"train": "train_accuracy", "validation": "val_accuracy", "test": "test_accuracy"}


@dataclass
class Splits:
    train: Dataset
    validation: Optional[Dataset] = None
    test: Optional[Dataset] = None

    def items(self) -> Iterator[Tuple[str, Dataset]]:
        for name in ("train", "validation", "test"):
            ds = getattr(self, name)
            if ds is not None:
                yield name, ds


@dataclass
class ExperimentResult:
    metrics: Dict[str, float]
    params: ParamVector
    train_result: Optional[TrainResult] = None
    splits: Optional[Splits] = None


def _nonempty(ds: Optional[Dataset]) -> Optional[Dataset]:
    return ds if ds is not None and ds.num_examples > 0 else None


def _load_raw(data: DataConfig, seed: int) -> Splits:
    if data.source == "synth":
        train_ds, val_ds, test_ds = synth_multifactor(data.synth)
        return Splits(train_ds, _nonempty(val_ds), _nonempty(test_ds))

    if data.source == "delimited":

        def load(features, labels, split):
            if not (features and labels):
                return None
            return load_delimited(features, labels, data.num_classes, data.label_name, split)

        return Splits(
            load(data.train_features, data.train_labels, "train"),
            load(data.validation_features, data.validation_labels, "validation"),
            load(data.test_features, data.test_labels, "test"),
        )

    train_ds = load_norb(*norb_paths(data.norb_train_prefix), split="train", normalize=data.norb_normalize)
    test_ds = None
    if data.norb_test_prefix:
        test_ds = load_norb(*norb_paths(data.norb_test_prefix), split="test", normalize=data.norb_normalize)
    val_ds = None
    if data.norb_validation_size > 0:
        if data.norb_validation_size >= train_ds.num_examples:
            raise InvalidInputError(
                f"norb_validation_size {data.norb_validation_size} leaves no training examples out of {train_ds.num_examples}"
            )
        order = np.random.default_rng(seed).permutation(train_ds.num_examples)
        val_ds = train_ds.take(order[: data.norb_validation_size], split="validation")
        train_ds = train_ds.take(order[data.norb_validation_size :])
    return Splits(train_ds, val_ds, test_ds)


def load_splits(data: DataConfig, seed: int = 0) -> Splits:
    """Load the configured source, draw the training subset and standardize with train statistics."""
    splits = _load_raw(data, seed)
    if data.train_subset is not None:
        splits.train = subsample(splits.train, data.train_subset, seed, stratified=data.stratified)
    if data.standardize:
        others = [ds for _, ds in splits.items() if ds is not splits.train]
        train_ds, transformed, _ = standardize(splits.train, others)
        mapping = {id(old): new for old, new in zip(others, transformed)}
        splits = Splits(
            train_ds,
            mapping.get(id(splits.validation)) if splits.validation is not None else None,
            mapping.get(id(splits.test)) if splits.test is not None else None,
        )
    logger.info(
        "Data ready: "
        + ", ".join(f"{name}={ds.num_examples}" for name, ds in splits.items())
        + f", K={splits.train.input_dim}"
    )
    return splits


def probe_partitions(model: ModelConfig) -> Dict[str, Tuple[int, int]]:
    """Named hidden-unit ranges probed besides the full layer: each GP term, then each head."""
    out = {}
    for i, gp in enumerate(model.gp):
        out[f"gp{i}_{gp.label}"] = model.gp_partition(i)
    for i, head in enumerate(model.heads):
        out[f"head{i}_{head.label}"] = model.head_partition(i)
    return out


def _probe_block(
    splits: Splits,
    params: ParamVector,
    label: str,
    probe: ProbeConfig,
    seed: int,
    partition: Optional[Tuple[int, int]] = None,
) -> Dict[str, float]:
    budget = CgOptions(max_iters=probe.max_iters, gradient_tolerance=1e-8)
    train_x = hidden_features(splits.train, params, partition)
    fitted = fit_probe(
        train_x,
        splits.train.label_sets[label].values,
        l2_strength=probe.l2_strength,
        budget=budget,
        seed=seed,
        standardize=probe.standardize,
    )
    out = {}
    for name, ds in splits.items():
        x = train_x if ds is splits.train else hidden_features(ds, params, partition)
        out[SPLIT_KEYS[name]] = probe_accuracy(fitted, x, ds.label_sets[label].values)
    return out


def check_layout(params: ParamVector, config: ModelConfig, dataset: Dataset) -> None:
    """Raise LayoutError unless params fit the model `config` describes on `dataset`."""
    objective = NpgaObjective(config, dataset.input_dim, dataset.label_kinds, dataset.label_dims)
    if params.layout != objective.layout:
        raise LayoutError("checkpoint layout does not match the configured model")


def evaluate_params(params: ParamVector, splits: Splits, config: RunConfig) -> Dict[str, float]:
    """
    Probe metrics for a parameter vector.

    Keys: train_accuracy, val_accuracy, test_accuracy, test_error for the full
    hidden layer and the probe label, then
    `probe.<label>.<partition>.<split>_accuracy` for every discrete label set
    and every GP term / head partition.
    """
    label = config.probe.label or splits.train.first_discrete()
    if label == FEATURES_LABEL or label not in splits.train.label_sets:
        raise InvalidInputError(f"probe label '{label}' is not a label set of the data")
    if splits.train.label_sets[label].kind != "discrete":
        raise InvalidInputError(f"probe label '{label}' must be discrete")
    seed = config.model.seed

    metrics = _probe_block(splits, params, label, config.probe, seed)
    if "test_accuracy" in metrics:
        metrics["test_error"] = 1.0 - metrics["test_accuracy"]
    if config.probe.partitions:
        discrete = [name for name, kind in splits.train.label_kinds.items() if kind == "discrete"]
        for name, span in probe_partitions(config.model).items():
            for probed in discrete:
                for key, value in _probe_block(splits, params, probed, config.probe, seed, span).items():
                    metrics[f"probe.{probed}.{name}.{key}"] = value
    return metrics


def run_experiment(config: RunConfig, splits: Optional[Splits] = None) -> ExperimentResult:
    """Train on the configured data and probe the learned code."""
    splits = splits or load_splits(config.data, config.model.seed)
    logger.info(f"Training: alpha={config.model.alpha} beta={config.model.beta} seed={config.model.seed}")
    result = train(splits.train, config.model, config.optimizer)
    if result.degraded_batches:
        logger.warning(f"{result.degraded_batches} minibatch visit(s) ended on a failed line search")
    metrics = evaluate_params(result.params, splits, config)
    if result.trace:
        metrics["final_cost"] = result.trace[-1].cost
    logger.info(
        "Run done: "
        + ", ".join(f"{k}={metrics[k]:.4f}" for k in ("train_accuracy", "val_accuracy", "test_accuracy") if k in metrics)
    )
    return ExperimentResult(metrics=metrics, params=result.params, train_result=result, splits=splits)
