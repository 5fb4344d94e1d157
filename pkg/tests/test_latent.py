import numpy as np
import pytest

from npga.core import autoencoder as ae
from npga.core.objective import NpgaObjective, pack, unpack
from npga.errors import InvalidInputError
from npga.evaluation import autoencoder_from, export_latent, hidden_features
from npga.models import GpGuidanceConfig, KernelSpec, ModelConfig


@pytest.fixture
def model(labelled_dataset, rng):
    config = ModelConfig(
        hidden_units=8,
        gp=[
            GpGuidanceConfig(label="class", start=0, stop=4, latent_dim=2),
            GpGuidanceConfig(label="azimuth", start=4, stop=6, latent_dim=1, kernel=KernelSpec(kind="periodic")),
        ],
    )
    objective = NpgaObjective(config, labelled_dataset.input_dim, labelled_dataset.label_kinds, labelled_dataset.label_dims)
    params = objective.initial_params(rng)
    blocks = unpack(params)
    blocks["enc_bias"] = rng.normal(0.0, 0.5, 8)
    return config, pack(blocks, objective.layout)


class TestHiddenFeatures:
    def test_deterministic_encoding(self, labelled_dataset, model):
        _, params = model
        expected = ae.encode(labelled_dataset.features, autoencoder_from(params))
        np.testing.assert_array_equal(hidden_features(labelled_dataset, params), expected)
        assert np.all(expected >= 0.0)

    def test_partition_slice(self, labelled_dataset, model):
        _, params = model
        full = hidden_features(labelled_dataset, params)
        np.testing.assert_array_equal(hidden_features(labelled_dataset, params, (2, 5)), full[:, 2:5])


class TestExportLatent:
    def test_columns_and_coordinates(self, labelled_dataset, model):
        config, params = model
        frame = export_latent(labelled_dataset, params, config, 0)
        assert list(frame.columns) == ["latent_0", "latent_1", "class", "elevation", "azimuth"]
        projection = unpack(params)["gp.0.projection"]
        coords = hidden_features(labelled_dataset, params, (0, 4)) @ projection.T
        np.testing.assert_allclose(frame[["latent_0", "latent_1"]].to_numpy(), coords, rtol=1e-12)
        np.testing.assert_array_equal(frame["class"], labelled_dataset.label_sets["class"].class_indices())

    def test_one_dimensional_latent(self, labelled_dataset, model):
        config, params = model
        frame = export_latent(labelled_dataset, params, config, 1)
        assert list(frame.columns)[:2] == ["latent_0", "class"]
        assert len(frame) == labelled_dataset.num_examples

    @pytest.mark.parametrize("index", [-1, 2])
    def test_spec_index_out_of_range(self, labelled_dataset, model, index):
        config, params = model
        with pytest.raises(InvalidInputError):
            export_latent(labelled_dataset, params, config, index)
