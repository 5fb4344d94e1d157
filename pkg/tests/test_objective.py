import numpy as np
import pytest

from npga.core import autoencoder as ae
from npga.core.guidance import l_gp_and_grad
from npga.core.objective import NpgaObjective, ParamLayout, ParamVector, pack, unpack
from npga.data.dataset import TargetEncoder
from npga.errors import InvalidInputError, InvalidSpecError, LayoutError
from npga.models import CorruptionSpec, GpGuidanceConfig, HeadConfig, KernelSpec, ModelConfig
from npga.runner.gradcheck import finite_difference_gradient, relative_errors

GP_TERMS = [
    GpGuidanceConfig(label="class", start=0, stop=4, latent_dim=2, kernel=KernelSpec(kind="rbf"), noise_variance=0.1),
    GpGuidanceConfig(label="azimuth", start=4, stop=6, latent_dim=1, kernel=KernelSpec(kind="periodic"), noise_variance=0.1),
]


def make_objective(dataset, **overrides):
    settings = dict(hidden_units=8, gp=GP_TERMS, corruption=CorruptionSpec(gaussian_std=0.1))
    settings.update(overrides)
    config = ModelConfig(**settings)
    return NpgaObjective(config, dataset.input_dim, dataset.label_kinds, dataset.label_dims)


def evaluate(objective, dataset, rng, scale=0.5):
    targets = TargetEncoder().fit(dataset).encode(dataset)
    params = ParamVector(rng.normal(0.0, scale, objective.layout.size), objective.layout)
    noise = objective.draw_noise(dataset.features, params, rng)
    breakdown, grad = objective.cost_and_grad(dataset.features, targets, params, noise)
    return params, targets, noise, breakdown, grad


class TestLayout:
    def test_pack_unpack_round_trip(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, lr_enabled=True)
        params = ParamVector(rng.standard_normal(objective.layout.size), objective.layout)
        blocks = unpack(params)
        assert list(blocks) == [name for name, _ in objective.layout.blocks]
        np.testing.assert_array_equal(pack(blocks, objective.layout).values, params.values)

    def test_block_shapes(self, labelled_dataset):
        objective = make_objective(labelled_dataset, lr_enabled=True)
        assert dict(objective.layout.blocks) == {
            "weight": (8, 5),
            "enc_bias": (8,),
            "dec_bias": (5,),
            "gp.0.projection": (2, 4),
            "gp.1.projection": (1, 2),
            "head.0.weights": (3, 8),
            "head.0.bias": (3,),
        }

    def test_full_size_model_arithmetic(self):
        J, K = 2400, 18432
        gp = [GpGuidanceConfig(label=f"f{i}", start=600 * i, stop=600 * (i + 1), latent_dim=2) for i in range(4)]
        config = ModelConfig(hidden_units=J, gp=gp)
        layout = ParamLayout.for_model(config, K, [], [])
        assert layout.size == J * K + J + K + 4 * 2 * 600

    def test_wrong_size_rejected(self, labelled_dataset):
        layout = make_objective(labelled_dataset).layout
        with pytest.raises(LayoutError):
            ParamVector(np.zeros(layout.size + 1), layout)
        with pytest.raises(LayoutError):
            unpack(np.zeros(layout.size - 1), layout)

    def test_pack_checks_blocks(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset)
        blocks = unpack(objective.initial_params(rng))
        blocks["weight"] = blocks["weight"][:, :4]
        with pytest.raises(LayoutError):
            pack(blocks, objective.layout)
        del blocks["weight"]
        with pytest.raises(LayoutError):
            pack(blocks, objective.layout)

    def test_layout_dict_round_trip(self, labelled_dataset):
        layout = make_objective(labelled_dataset, lr_enabled=True).layout
        assert ParamLayout.from_dict(layout.to_dict()) == layout


class TestInitialParams:
    def test_biases_and_heads_start_at_zero(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, lr_enabled=True)
        blocks = unpack(objective.initial_params(rng))
        for name in ("enc_bias", "dec_bias", "head.0.weights", "head.0.bias"):
            np.testing.assert_array_equal(blocks[name], 0.0)
        assert np.max(np.abs(blocks["weight"])) <= 1.0 / np.sqrt(5)
        assert np.max(np.abs(blocks["gp.0.projection"])) <= 1.0 / np.sqrt(4)

    def test_autoencoder_draws_ignore_guidance(self, labelled_dataset):
        guided = make_objective(labelled_dataset)
        plain = make_objective(labelled_dataset, gp=[])
        a = guided.initial_params(np.random.default_rng(5), np.random.default_rng(6))
        b = plain.initial_params(np.random.default_rng(5), np.random.default_rng(6))
        np.testing.assert_array_equal(unpack(a)["weight"], unpack(b)["weight"])


class TestBlendedCost:
    def test_alpha_zero_is_pure_reconstruction(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=0.0)
        params, _, noise, breakdown, grad = evaluate(objective, labelled_dataset, rng)
        blocks = unpack(params)
        cost, ae_grad = ae.l_auto_and_grad(
            labelled_dataset.features,
            noise.corrupted,
            objective.autoencoder_params(blocks),
            mode="nrelu_noisy",
            activation_noise=noise.activation,
        )
        g = unpack(grad)
        assert breakdown.total == pytest.approx(cost, rel=1e-12)
        np.testing.assert_allclose(g["weight"], ae_grad.weight, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(g["enc_bias"], ae_grad.enc_bias, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(g["dec_bias"], ae_grad.dec_bias, rtol=1e-12, atol=1e-14)
        np.testing.assert_array_equal(g["gp.0.projection"], 0.0)
        assert breakdown.gp_terms == []

    def test_alpha_one_is_mean_gp_cost(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=1.0, beta=1.0)
        _, _, _, breakdown, grad = evaluate(objective, labelled_dataset, rng)
        assert len(breakdown.gp_terms) == 2
        assert breakdown.total == pytest.approx(np.mean(breakdown.gp_terms), rel=1e-12)
        assert breakdown.l_auto == 0.0
        np.testing.assert_array_equal(unpack(grad)["dec_bias"], 0.0)

    def test_blend_weights(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=0.5, beta=0.5, lr_enabled=True)
        _, _, _, breakdown, _ = evaluate(objective, labelled_dataset, rng)
        expected = 0.5 * breakdown.l_auto + 0.25 * breakdown.l_lr + 0.25 * breakdown.l_gp
        assert breakdown.total == pytest.approx(expected, rel=1e-12)
        assert breakdown.l_lr > 0.0

    def test_lr_disabled_means_beta_one(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=1.0, beta=0.3, lr_enabled=False)
        _, _, _, breakdown, _ = evaluate(objective, labelled_dataset, rng)
        assert objective.config.effective_beta == 1.0
        assert breakdown.total == pytest.approx(breakdown.l_gp, rel=1e-12)

    def test_gradient_matches_finite_differences(self, labelled_dataset, rng):
        objective = make_objective(
            labelled_dataset,
            alpha=0.5,
            beta=0.5,
            lr_enabled=True,
            heads=[HeadConfig(label="class", start=0, stop=4), HeadConfig(label="elevation", kind="gaussian", start=4)],
        )
        params, targets, noise, _, grad = evaluate(objective, labelled_dataset, rng)

        def cost(v):
            return objective.cost_and_grad(labelled_dataset.features, targets, ParamVector(v, objective.layout), noise)[0].total

        coords = rng.choice(objective.layout.size, size=30, replace=False)
        numeric = finite_difference_gradient(cost, params.values, coords=coords)
        assert relative_errors(grad.values[coords], numeric[coords]).max() < 1e-4

    def test_clean_guidance_encodes_uncorrupted_batch(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=1.0, beta=1.0, gp=GP_TERMS[:1], guidance_noise="clean")
        params, targets, _, breakdown, _ = evaluate(objective, labelled_dataset, rng)
        blocks = unpack(params)
        hidden = ae.forward(labelled_dataset.features, objective.autoencoder_params(blocks)).hidden
        spec = objective.gp_specs(blocks)[0]
        assert breakdown.total == pytest.approx(l_gp_and_grad(hidden, spec, targets["class"]).cost, rel=1e-12)

    def test_features_label_targets_clean_inputs(self, labelled_dataset, rng):
        gp = [GpGuidanceConfig(label="features", start=0, stop=8, latent_dim=2, noise_variance=0.1)]
        objective = make_objective(labelled_dataset, alpha=1.0, gp=gp, guidance_noise="clean")
        params, _, _, breakdown, _ = evaluate(objective, labelled_dataset, rng)
        blocks = unpack(params)
        hidden = ae.forward(labelled_dataset.features, objective.autoencoder_params(blocks)).hidden
        spec = objective.gp_specs(blocks)[0]
        assert breakdown.total == pytest.approx(l_gp_and_grad(hidden, spec, labelled_dataset.features).cost, rel=1e-12)


class TestObjectiveErrors:
    def test_unknown_gp_label(self, labelled_dataset):
        with pytest.raises(InvalidInputError):
            make_objective(labelled_dataset, gp=[GpGuidanceConfig(label="shape", start=0, stop=4)])

    def test_logistic_head_needs_discrete_label(self, labelled_dataset):
        with pytest.raises(InvalidInputError):
            make_objective(labelled_dataset, lr_enabled=True, heads=[HeadConfig(label="elevation")])

    def test_lr_without_discrete_label(self, labelled_dataset):
        config = ModelConfig(hidden_units=8, lr_enabled=True)
        with pytest.raises(InvalidSpecError):
            NpgaObjective(config, 5, {"elevation": "continuous"}, {"elevation": 1})

    def test_missing_targets(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset, alpha=1.0)
        params = objective.initial_params(rng)
        noise = objective.draw_noise(labelled_dataset.features, params, rng)
        with pytest.raises(InvalidInputError):
            objective.cost_and_grad(labelled_dataset.features, {}, params, noise)

    def test_batch_width_checked(self, labelled_dataset, rng):
        objective = make_objective(labelled_dataset)
        params = objective.initial_params(rng)
        noise = objective.draw_noise(labelled_dataset.features, params, rng)
        with pytest.raises(ValueError):
            objective.cost_and_grad(labelled_dataset.features[:, :4], {}, params, noise)


def test_blended_cost_draws_noise_from_rng(labelled_dataset):
    objective = make_objective(labelled_dataset, alpha=0.5)
    targets = TargetEncoder().fit(labelled_dataset).encode(labelled_dataset)
    params = objective.initial_params(np.random.default_rng(0))
    cost, grad = objective.blended_cost_and_grad(labelled_dataset.features, targets, params, np.random.default_rng(8))

    noise = objective.draw_noise(labelled_dataset.features, params, np.random.default_rng(8))
    breakdown, expected = objective.cost_and_grad(labelled_dataset.features, targets, params, noise)
    assert cost == breakdown.total
    np.testing.assert_array_equal(grad.values, expected.values)

    other, _ = objective.blended_cost_and_grad(labelled_dataset.features, targets, params, np.random.default_rng(9))
    assert other != cost
