from pathlib import Path

import numpy as np
import pytest

from npga.core.objective import NpgaObjective
from npga.data.dataset import Dataset, LabelSet, one_hot
from npga.data.norb import norb_paths, write_norb
from npga.errors import InvalidInputError, LayoutError
from npga.models import DataConfig, GpGuidanceConfig, ModelConfig, OptimizerConfig, ProbeConfig, RunConfig, SynthConfig
from npga.runner.config_loader import load_run_config
from npga.runner.experiment import (
    Splits,
    check_layout,
    evaluate_params,
    load_splits,
    probe_partitions,
    run_experiment,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def oil_data(files, **overrides):
    settings = dict(source="delimited", num_classes=3, **files)
    settings.update(overrides)
    return DataConfig(**settings)


class TestLoadSplits:
    def test_delimited_subset_and_standardize(self, oil_like_files):
        splits = load_splits(oil_data(oil_like_files, train_subset=30), seed=0)
        assert splits.train.num_examples == 30
        assert splits.validation.num_examples == 30
        assert splits.test.num_examples == 60
        np.testing.assert_allclose(splits.train.features.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_array_equal(np.bincount(splits.train.label_sets["class"].class_indices()), [10, 10, 10])

    def test_subset_depends_on_seed(self, oil_like_files):
        data = oil_data(oil_like_files, train_subset=30, standardize=False)
        a = load_splits(data, seed=0).train.features
        b = load_splits(data, seed=1).train.features
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, load_splits(data, seed=0).train.features)

    def test_optional_splits(self, oil_like_files):
        files = {k: v for k, v in oil_like_files.items() if not k.startswith("validation")}
        splits = load_splits(oil_data(files), seed=0)
        assert splits.validation is None
        assert [name for name, _ in splits.items()] == ["train", "test"]

    def test_empty_synth_splits_are_dropped(self):
        data = DataConfig(synth=SynthConfig(train_samples=20, validation_samples=0, test_samples=10))
        splits = load_splits(data)
        assert splits.validation is None
        assert splits.test.num_examples == 10

    def test_norb_validation_holdout(self, tmp_path, rng):
        n = 10
        ds = Dataset(
            rng.integers(0, 256, (n, 8)) / 255.0,
            {
                "class": LabelSet("discrete", one_hot(np.arange(n) % 5, 5)),
                "elevation": LabelSet("continuous", 30.0 + 5.0 * (np.arange(n) % 9)),
                "azimuth": LabelSet("periodic", 20.0 * np.arange(n), period=360.0),
                "lighting": LabelSet("discrete", one_hot(np.arange(n) % 6, 6)),
            },
            metadata={"image_shape": (2, 2, 2)},
        )
        prefix = str(tmp_path / "norb-train")
        write_norb(ds, *norb_paths(prefix))

        data = DataConfig(source="norb", norb_train_prefix=prefix, norb_validation_size=3, standardize=False)
        splits = load_splits(data, seed=4)
        assert splits.train.num_examples == 7
        assert splits.validation.num_examples == 3
        assert splits.validation.split == "validation"
        assert splits.test is None
        merged = np.sort(np.concatenate([splits.train.features[:, 0], splits.validation.features[:, 0]]))
        np.testing.assert_allclose(merged, np.sort(ds.features[:, 0]))

        with pytest.raises(InvalidInputError):
            load_splits(data.model_copy(update={"norb_validation_size": 10}), seed=4)


class TestEvaluation:
    def test_probe_partition_names(self):
        model = ModelConfig(
            hidden_units=10,
            lr_enabled=True,
            gp=[GpGuidanceConfig(label="class", start=0, stop=4), GpGuidanceConfig(label="azimuth", start=4, stop=6, latent_dim=1)],
        )
        assert probe_partitions(model) == {"gp0_class": (0, 4), "gp1_azimuth": (4, 6)}

    def test_check_layout(self, labelled_dataset, rng):
        model = ModelConfig(hidden_units=8)
        params = NpgaObjective(model, 5, labelled_dataset.label_kinds, labelled_dataset.label_dims).initial_params(rng)
        check_layout(params, model, labelled_dataset)
        with pytest.raises(LayoutError):
            check_layout(params, ModelConfig(hidden_units=9), labelled_dataset)

    def test_metric_keys(self, labelled_dataset, rng):
        model = ModelConfig(hidden_units=8, gp=[GpGuidanceConfig(label="class", start=0, stop=4)])
        config = RunConfig(model=model, probe=ProbeConfig(max_iters=20))
        params = NpgaObjective(model, 5, labelled_dataset.label_kinds, labelled_dataset.label_dims).initial_params(rng)
        splits = Splits(labelled_dataset, test=labelled_dataset.take(np.arange(6), split="test"))
        metrics = evaluate_params(params, splits, config)
        assert set(metrics) == {
            "train_accuracy",
            "test_accuracy",
            "test_error",
            "probe.class.gp0_class.train_accuracy",
            "probe.class.gp0_class.test_accuracy",
        }

    def test_probe_label_must_be_discrete(self, labelled_dataset, rng):
        model = ModelConfig(hidden_units=8)
        params = NpgaObjective(model, 5, labelled_dataset.label_kinds, labelled_dataset.label_dims).initial_params(rng)
        for label in ("elevation", "shape", "features"):
            with pytest.raises(InvalidInputError):
                evaluate_params(params, Splits(labelled_dataset), RunConfig(model=model, probe=ProbeConfig(label=label)))


class TestRunExperiment:
    def test_tiny_synth_run(self, tiny_run_config):
        result = run_experiment(tiny_run_config)
        assert {"train_accuracy", "val_accuracy", "test_accuracy", "final_cost"} <= set(result.metrics)
        assert result.params.layout == result.train_result.objective.layout
        assert result.splits.train.num_examples == 60

    def test_guided_run_on_oil_like_data(self, oil_like_files):
        config = RunConfig(
            data=oil_data(oil_like_files),
            model=ModelConfig(hidden_units=20, alpha=0.5, gp=[GpGuidanceConfig(label="class", latent_dim=2, noise_variance=0.1)]),
            optimizer=OptimizerConfig(minibatch_size=90, cg_iters_per_batch=30),
            probe=ProbeConfig(partitions=False),
        )
        metrics = run_experiment(config).metrics
        assert metrics["test_accuracy"] >= 0.8
        assert metrics["test_error"] == pytest.approx(1.0 - metrics["test_accuracy"])


def reseeded(config: RunConfig, seed: int) -> RunConfig:
    synth = config.data.synth.model_copy(update={"seed": seed})
    return config.model_copy(
        update={
            "model": config.model.model_copy(update={"seed": seed}),
            "data": config.data.model_copy(update={"synth": synth}),
        }
    )


@pytest.mark.slow
def test_guided_class_partition_isolates_class_on_shipped_synth_configs():
    guided = load_run_config(str(CONFIG_DIR / "synth_npga.txt"))
    unguided = load_run_config(str(CONFIG_DIR / "synth_autoencoder.txt"))
    assert guided.data == unguided.data

    class_partition, nuisance_partitions, full_layer = [], [], []
    for seed in range(5):
        splits = load_splits(reseeded(guided, seed).data, seed)
        metrics = run_experiment(reseeded(guided, seed), splits).metrics
        class_partition.append(metrics["probe.class.gp0_class.test_accuracy"])
        nuisance_partitions.append(
            np.mean(
                [
                    metrics[f"probe.class.{name}.test_accuracy"]
                    for name in ("gp1_elevation", "gp2_azimuth", "gp3_lighting")
                ]
            )
        )
        full_layer.append(run_experiment(reseeded(unguided, seed), splits).metrics["test_accuracy"])

    assert np.mean(class_partition) >= np.mean(full_layer) + 0.02
    assert np.mean(class_partition) >= np.mean(nuisance_partitions) + 0.05
