"""Shared fixtures for the npga test suite."""

import numpy as np
import pytest

from npga.data.dataset import Dataset, LabelSet, one_hot
from npga.models import RunConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def labelled_dataset(rng):
    """Twelve examples, five features, one label set of every kind."""
    n = 12
    classes = np.arange(n) % 3
    return Dataset(
        rng.standard_normal((n, 5)),
        {
            "class": LabelSet("discrete", one_hot(classes, 3)),
            "elevation": LabelSet("continuous", rng.uniform(-1.0, 1.0, n)),
            "azimuth": LabelSet("periodic", rng.uniform(0.0, 6.0, n), period=2.0 * np.pi),
        },
    )


def write_rows(path, rows):
    path.write_text("\n".join(" ".join(str(v) for v in row) for row in rows) + "\n")
    return str(path)


@pytest.fixture
def oil_like_files(tmp_path, rng):
    """Delimited feature/label files shaped like the oil-flow distribution (3 classes, 12 features)."""
    files = {}
    for split, n in (("train", 90), ("validation", 30), ("test", 60)):
        classes = np.arange(n) % 3
        centers = np.eye(3, 12) * 3.0
        features = centers[classes] + rng.normal(0.0, 0.5, (n, 12))
        files[f"{split}_features"] = write_rows(tmp_path / f"{split}_x.txt", features.round(6))
        files[f"{split}_labels"] = write_rows(tmp_path / f"{split}_y.txt", one_hot(classes, 3).astype(int))
    return files


TINY_SYNTH_CONFIG = """
# tiny synthetic run for tests
data.source = synth
data.synth.classes = 3
data.synth.input_dim = 6
data.synth.train_samples = 60
data.synth.validation_samples = 20
data.synth.test_samples = 40
data.synth.seed = 3

model.alpha = 0.5
model.hidden_units = 8
model.gp.0.label = class
model.gp.0.start = 0
model.gp.0.stop = 4
model.gp.0.kernel.kind = rbf
model.gp.1.label = azimuth
model.gp.1.start = 4
model.gp.1.stop = 6
model.gp.1.latent_dim = 1
model.gp.1.kernel.kind = periodic

optimizer.minibatch_size = 30
optimizer.cg_iters_per_batch = 3
optimizer.epochs = 2

probe.max_iters = 100
"""


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text(TINY_SYNTH_CONFIG)
    return path


@pytest.fixture
def tiny_run_config(tiny_config_file) -> RunConfig:
    from npga.runner.config_loader import load_run_config

    return load_run_config(str(tiny_config_file))
