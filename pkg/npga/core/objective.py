"""
Blended NPGA training objective over a flat parameter vector.

    L = (1 - alpha) L_auto + alpha ((1 - beta) L_LR + beta L_GP)

L_GP is the unweighted mean over the configured GP terms and L_LR the
unweighted mean over the parametric heads.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from npga.core import autoencoder as ae
from npga.core.guidance import (
    GpGuidanceSpec,
    HeadSpec,
    l_gauss_and_grad,
    l_gp_and_grad,
    l_lr_and_grad,
)
from npga.errors import InvalidInputError, LayoutError, ShapeError
from npga.models import HeadConfig, ModelConfig

logger = logging.getLogger(__name__)

FEATURES_LABEL = "features"


@dataclass(frozen=True)
class ParamLayout:
    """Ordered (name, shape) blocks of the flat parameter vector."""

    blocks: Tuple[Tuple[str, Tuple[int, ...]], ...]

    @property
    def size(self) -> int:
        return int(sum(np.prod(shape, dtype=np.int64) for _, shape in self.blocks))

    def offsets(self) -> Dict[str, Tuple[int, int, Tuple[int, ...]]]:
        out = {}
        pos = 0
        for name, shape in self.blocks:
            n = int(np.prod(shape, dtype=np.int64))
            out[name] = (pos, pos + n, shape)
            pos += n
        return out

    def to_dict(self) -> List[Dict]:
        return [{"name": name, "shape": list(shape)} for name, shape in self.blocks]

    @classmethod
    def from_dict(cls, blocks: List[Dict]) -> "ParamLayout":
        return cls(tuple((b["name"], tuple(int(s) for s in b["shape"])) for b in blocks))

    @classmethod
    def for_model(
        cls,
        config: ModelConfig,
        input_dim: int,
        heads: List[HeadConfig],
        head_outputs: List[int],
    ) -> "ParamLayout":
        """Layout is deterministic given the config, the input width and the head output widths."""
        J = config.hidden_units
        blocks = [("weight", (J, input_dim)), ("enc_bias", (J,)), ("dec_bias", (input_dim,))]
        for i, gp in enumerate(config.gp):
            start, stop = config.gp_partition(i)
            blocks.append((f"gp.{i}.projection", (gp.latent_dim, stop - start)))
        for i, head in enumerate(heads):
            start = head.start
            stop = J if head.stop is None else head.stop
            blocks.append((f"head.{i}.weights", (head_outputs[i], stop - start)))
            blocks.append((f"head.{i}.bias", (head_outputs[i],)))
        return cls(tuple(blocks))


@dataclass
class ParamVector:
    values: np.ndarray
    layout: ParamLayout

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size != self.layout.size:
            raise LayoutError(f"vector of size {self.values.size} does not match layout size {self.layout.size}")

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.layout)


def pack(blocks: Mapping[str, np.ndarray], layout: ParamLayout) -> ParamVector:
    """Concatenate named parameter blocks in layout order."""
    parts = []
    for name, shape in layout.blocks:
        if name not in blocks:
            raise LayoutError(f"missing parameter block: {name}")
        arr = np.asarray(blocks[name], dtype=np.float64)
        if arr.shape != shape:
            raise LayoutError(f"block {name} has shape {arr.shape}, layout expects {shape}")
        parts.append(arr.ravel())
    extra = set(blocks) - {name for name, _ in layout.blocks}
    if extra:
        raise LayoutError(f"unexpected parameter blocks: {sorted(extra)}")
    values = np.concatenate(parts) if parts else np.zeros(0)
    return ParamVector(values, layout)


def unpack(vector: ParamVector, layout: Optional[ParamLayout] = None) -> Dict[str, np.ndarray]:
    """Split a flat vector into named blocks (copies)."""
    layout = layout or vector.layout
    values = np.asarray(vector.values if isinstance(vector, ParamVector) else vector, dtype=np.float64)
    if values.ndim != 1 or values.size != layout.size:
        raise LayoutError(f"vector of size {values.size} does not match layout size {layout.size}")
    return {name: values[s:e].reshape(shape).copy() for name, (s, e, shape) in layout.offsets().items()}


@dataclass
class NoiseSample:
    """Corrupted inputs and NReLU activation noise, frozen for one optimization visit."""

    corrupted: np.ndarray
    activation: Optional[np.ndarray]


@dataclass
class CostBreakdown:
    total: float
    l_auto: float = 0.0
    l_lr: float = 0.0
    l_gp: float = 0.0
    gp_terms: List[float] = field(default_factory=list)
    head_terms: List[float] = field(default_factory=list)


class NpgaObjective:
    """
    Binds a ModelConfig to concrete label dimensions and evaluates the blended cost.

    Targets passed to `cost_and_grad` are already encoded per label name
    (one-hot for discrete labels, standardized continuous values, periodic
    angles) and must cover every label referenced by the config.
    """

    def __init__(self, config: ModelConfig, input_dim: int, label_kinds: Mapping[str, str], label_dims: Mapping[str, int]):
        self.config = config
        self.input_dim = input_dim
        self.label_kinds = dict(label_kinds)
        self.label_dims = dict(label_dims)
        self.heads = config.resolved_heads(self.label_kinds)
        for gp in config.gp:
            if gp.label != FEATURES_LABEL and gp.label not in self.label_dims:
                raise InvalidInputError(f"GP guidance refers to unknown label set '{gp.label}'")
        for head in self.heads:
            if head.label not in self.label_dims:
                raise InvalidInputError(f"parametric head refers to unknown label set '{head.label}'")
            if head.kind == "logistic" and self.label_kinds.get(head.label) != "discrete":
                raise InvalidInputError(f"logistic head needs a discrete label, '{head.label}' is {self.label_kinds.get(head.label)}")
        self.head_outputs = [self.label_dims[h.label] for h in self.heads]
        self.layout = ParamLayout.for_model(config, input_dim, self.heads, self.head_outputs)

    # ------------------------------------------------------------------
    # parameters
    # ------------------------------------------------------------------
    def initial_params(self, rng: np.random.Generator, guidance_rng: Optional[np.random.Generator] = None) -> ParamVector:
        """
        Fresh parameters: fan-in uniform weights and projections, zero biases, zero heads.

        Projections come from guidance_rng when given, so the autoencoder draws
        do not depend on how many GP terms are configured.
        """
        guidance_rng = guidance_rng or rng
        J = self.config.hidden_units
        params = ae.AutoencoderParams.initialize(self.input_dim, J, rng)
        blocks = {"weight": params.weight, "enc_bias": params.enc_bias, "dec_bias": params.dec_bias}
        for i, gp in enumerate(self.config.gp):
            start, stop = self.config.gp_partition(i)
            bound = 1.0 / np.sqrt(stop - start)
            blocks[f"gp.{i}.projection"] = guidance_rng.uniform(-bound, bound, size=(gp.latent_dim, stop - start))
        for i, head in enumerate(self.heads):
            stop = J if head.stop is None else head.stop
            blocks[f"head.{i}.weights"] = np.zeros((self.head_outputs[i], stop - head.start))
            blocks[f"head.{i}.bias"] = np.zeros(self.head_outputs[i])
        return pack(blocks, self.layout)

    def autoencoder_params(self, blocks: Mapping[str, np.ndarray]) -> ae.AutoencoderParams:
        return ae.AutoencoderParams(blocks["weight"], blocks["enc_bias"], blocks["dec_bias"])

    def gp_specs(self, blocks: Mapping[str, np.ndarray]) -> List[GpGuidanceSpec]:
        specs = []
        for i, gp in enumerate(self.config.gp):
            specs.append(
                GpGuidanceSpec(
                    partition=self.config.gp_partition(i),
                    projection=blocks[f"gp.{i}.projection"],
                    kernel=gp.kernel,
                    noise_variance=gp.noise_variance,
                    target_label_set=gp.label,
                )
            )
        return specs

    def head_specs(self, blocks: Mapping[str, np.ndarray]) -> List[HeadSpec]:
        J = self.config.hidden_units
        return [
            HeadSpec(
                weights=blocks[f"head.{i}.weights"],
                bias=blocks[f"head.{i}.bias"],
                partition=(head.start, J if head.stop is None else head.stop),
            )
            for i, head in enumerate(self.heads)
        ]

    # ------------------------------------------------------------------
    # noise
    # ------------------------------------------------------------------
    def draw_noise(self, clean_batch: np.ndarray, params: ParamVector, rng: np.random.Generator) -> NoiseSample:
        """Corruption first, then NReLU noise at the current pre-activations of the corrupted batch."""
        corrupted = ae.corrupt(clean_batch, self.config.corruption, rng)
        activation = None
        if self.config.activation == "nrelu":
            blocks = unpack(params)
            pre = ae.pre_activation(corrupted, self.autoencoder_params(blocks))
            activation = ae.draw_activation_noise(pre, rng)
        return NoiseSample(corrupted=corrupted, activation=activation)

    # ------------------------------------------------------------------
    # cost
    # ------------------------------------------------------------------
    def _targets_for(self, label: str, clean: np.ndarray, targets: Mapping[str, np.ndarray]) -> np.ndarray:
        if label == FEATURES_LABEL:
            return clean
        if label not in targets:
            raise InvalidInputError(f"missing targets for label set '{label}'")
        return targets[label]

    def cost_and_grad(
        self,
        clean_batch,
        targets: Mapping[str, np.ndarray],
        params: ParamVector,
        noise: NoiseSample,
        grad_scale: Optional[Mapping[str, float]] = None,
    ) -> Tuple[CostBreakdown, ParamVector]:
        """
        Blended cost and flat gradient with the noise held fixed.

        grad_scale multiplies individual terms' gradients ("l_auto", "l_lr",
        "l_gp"); it exists only to exercise the gradient checker.
        """
        clean = np.asarray(clean_batch, dtype=np.float64)
        if clean.ndim != 2 or clean.shape[0] < 1:
            raise InvalidInputError(f"batch must be a nonempty N x K matrix, got shape {clean.shape}")
        if clean.shape[1] != self.input_dim:
            raise ShapeError(f"batch has {clean.shape[1]} columns, model expects {self.input_dim}")
        scale = dict(grad_scale or {})
        cfg = self.config
        alpha = cfg.alpha
        beta = cfg.effective_beta
        w_auto = 1.0 - alpha
        w_lr = alpha * (1.0 - beta) if self.heads else 0.0
        w_gp = alpha * beta if cfg.gp else 0.0

        blocks = unpack(params)
        ae_params = self.autoencoder_params(blocks)
        grads = {name: np.zeros(shape) for name, shape in self.layout.blocks}
        breakdown = CostBreakdown(total=0.0)

        enc_pass = ae.forward(noise.corrupted, ae_params, noise.activation)
        d_hidden = np.zeros_like(enc_pass.hidden)

        if w_auto > 0.0:
            l_auto, dh_auto, d_dec_w, d_dec_b = ae.reconstruction_cost(clean, enc_pass, ae_params.weight, ae_params.dec_bias)
            s = w_auto * scale.get("l_auto", 1.0)
            breakdown.l_auto = l_auto
            breakdown.total += w_auto * l_auto
            d_hidden += s * dh_auto
            grads["weight"] += s * d_dec_w
            grads["dec_bias"] += s * d_dec_b

        guide_pass = enc_pass
        if (w_lr > 0.0 or w_gp > 0.0) and cfg.guidance_noise == "clean":
            guide_pass = ae.forward(clean, ae_params, None)
        d_guide = d_hidden if guide_pass is enc_pass else np.zeros_like(guide_pass.hidden)
        hidden = guide_pass.hidden

        if w_lr > 0.0:
            n_heads = len(self.heads)
            for i, (head, spec) in enumerate(zip(self.heads, self.head_specs(blocks))):
                z = self._targets_for(head.label, clean, targets)
                if head.kind == "logistic":
                    result = l_lr_and_grad(hidden, spec, z)
                else:
                    result = l_gauss_and_grad(hidden, spec, z)
                breakdown.head_terms.append(result.cost)
                s = w_lr * scale.get("l_lr", 1.0) / n_heads
                start, stop = spec.partition
                d_guide[:, start:stop] += s * result.hidden_grad
                grads[f"head.{i}.weights"] += s * result.weights_grad
                grads[f"head.{i}.bias"] += s * result.bias_grad
            breakdown.l_lr = float(np.mean(breakdown.head_terms))
            breakdown.total += w_lr * breakdown.l_lr

        if w_gp > 0.0:
            n_gp = len(cfg.gp)
            for i, spec in enumerate(self.gp_specs(blocks)):
                z = self._targets_for(spec.target_label_set, clean, targets)
                result = l_gp_and_grad(hidden, spec, z)
                breakdown.gp_terms.append(result.cost)
                s = w_gp * scale.get("l_gp", 1.0) / n_gp
                start, stop = spec.partition
                d_guide[:, start:stop] += s * result.hidden_grad
                grads[f"gp.{i}.projection"] += s * result.projection_grad
            breakdown.l_gp = float(np.mean(breakdown.gp_terms))
            breakdown.total += w_gp * breakdown.l_gp

        d_w, d_b = ae.encoder_backward(d_hidden, enc_pass)
        grads["weight"] += d_w
        grads["enc_bias"] += d_b
        if d_guide is not d_hidden:
            d_w, d_b = ae.encoder_backward(d_guide, guide_pass)
            grads["weight"] += d_w
            grads["enc_bias"] += d_b

        return breakdown, pack(grads, self.layout)

    def blended_cost_and_grad(
        self,
        clean_batch,
        targets: Mapping[str, np.ndarray],
        params: ParamVector,
        rng: np.random.Generator,
    ) -> Tuple[float, ParamVector]:
        """Draw the noise once, then evaluate cost and gradient on it."""
        noise = self.draw_noise(np.asarray(clean_batch, dtype=np.float64), params, rng)
        breakdown, grad = self.cost_and_grad(clean_batch, targets, params, noise)
        return breakdown.total, grad
