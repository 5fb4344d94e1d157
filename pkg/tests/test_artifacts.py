import json

import numpy as np
import pandas as pd
import pytest

from npga.core.objective import ParamLayout, ParamVector
from npga.errors import FormatError, LayoutError
from npga.runner.artifacts import (
    load_checkpoint,
    read_metrics,
    read_trace,
    save_checkpoint,
    write_metrics,
    write_trace,
)

LAYOUT = ParamLayout((("weight", (3, 2)), ("enc_bias", (3,)), ("dec_bias", (2,))))


@pytest.fixture
def params(rng):
    return ParamVector(rng.standard_normal(LAYOUT.size), LAYOUT)


class TestCheckpoint:
    def test_save_and_load(self, params, tiny_run_config, tmp_path):
        header_path, array_path = save_checkpoint(str(tmp_path / "checkpoint"), params, tiny_run_config)
        assert header_path.endswith("checkpoint.json")
        assert array_path.endswith("checkpoint.npy")
        loaded, config = load_checkpoint(header_path)
        np.testing.assert_array_equal(loaded.values, params.values)
        assert loaded.layout == LAYOUT
        assert config == tiny_run_config

    def test_without_config(self, params, tmp_path):
        save_checkpoint(str(tmp_path / "ck.npy"), params)
        _, config = load_checkpoint(str(tmp_path / "ck"))
        assert config is None

    def test_size_mismatch(self, params, tmp_path):
        save_checkpoint(str(tmp_path / "ck"), params)
        np.save(tmp_path / "ck.npy", np.zeros(LAYOUT.size - 1))
        with pytest.raises(LayoutError):
            load_checkpoint(str(tmp_path / "ck"))

    def test_unknown_format(self, params, tmp_path):
        header_path, _ = save_checkpoint(str(tmp_path / "ck"), params)
        header = json.loads(open(header_path).read())
        header["format"] = 99
        with open(header_path, "w") as f:
            json.dump(header, f)
        with pytest.raises(FormatError, match="format"):
            load_checkpoint(header_path)

    def test_malformed_header(self, params, tmp_path):
        header_path, _ = save_checkpoint(str(tmp_path / "ck"), params)
        with open(header_path, "w") as f:
            f.write("{not json")
        with pytest.raises(FormatError):
            load_checkpoint(header_path)

    def test_missing(self, tmp_path):
        with pytest.raises(FormatError, match="does not exist"):
            load_checkpoint(str(tmp_path / "nothing"))


class TestMetricsAndTrace:
    def test_metrics_keep_full_precision(self, tmp_path):
        path = str(tmp_path / "metrics.txt")
        metrics = {"test_accuracy": 0.1 + 0.2, "train_accuracy": 1.0, "probe.class.gp0_class.test_accuracy": 2.0 / 3.0}
        write_metrics(path, metrics)
        assert read_metrics(path) == metrics
        keys = [line.split(" = ")[0] for line in open(path).read().splitlines()]
        assert keys == sorted(metrics)

    def test_nan_survives(self, tmp_path):
        path = str(tmp_path / "metrics.txt")
        write_metrics(path, {"val_accuracy": float("nan")})
        assert np.isnan(read_metrics(path)["val_accuracy"])

    def test_non_numeric_metric(self, tmp_path):
        path = tmp_path / "metrics.txt"
        path.write_text("test_accuracy = high\n")
        with pytest.raises(FormatError, match="test_accuracy"):
            read_metrics(str(path))

    def test_trace(self, tmp_path):
        path = str(tmp_path / "trace.csv")
        frame = pd.DataFrame({"epoch": [0, 0], "minibatch": [0, 1], "iteration": [1, 1], "cost": [3.5, 1.0 / 3.0]})
        write_trace(path, frame)
        pd.testing.assert_frame_equal(read_trace(path), frame)
