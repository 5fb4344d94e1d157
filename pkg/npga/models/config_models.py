from math import isfinite, pi
from typing import Annotated, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

from npga.errors import InvalidSpecError


def _split_list(v):
    """Accept "0,0.5,1" style strings for list fields."""
    if isinstance(v, str):
        parts = [p.strip() for p in v.split(",")]
        return [p for p in parts if p]
    return v


FloatList = Annotated[List[float], BeforeValidator(_split_list)]


class KernelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["linear", "rbf", "arcsine", "periodic"] = "rbf"
    signal_variance: float = 1.0
    lengthscale: float = 1.0
    period: float = 2 * pi
    input_weight: float = 1.0
    bias_weight: float = 1.0

    @field_validator("signal_variance", "lengthscale", "period", "input_weight", "bias_weight")
    @classmethod
    def validate_positive(cls, v, info):
        if not isfinite(v) or v <= 0:
            raise InvalidSpecError(f"{info.field_name} must be finite and > 0, got {v}")
        return v


class CorruptionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    scheme: Literal["gaussian", "mask"] = "gaussian"
    gaussian_std: float = 0.05
    mask_fraction: float = 0.2

    @field_validator("gaussian_std")
    @classmethod
    def validate_std(cls, v):
        if not isfinite(v) or v < 0:
            raise InvalidSpecError(f"gaussian_std must be >= 0, got {v}")
        return v

    @field_validator("mask_fraction")
    @classmethod
    def validate_fraction(cls, v):
        if not 0.0 <= v <= 1.0:
            raise InvalidSpecError(f"mask_fraction must lie in [0, 1], got {v}")
        return v


class GpGuidanceConfig(BaseModel):
    """One GP guidance term: which label, which hidden units, which kernel."""

    model_config = ConfigDict(extra="forbid")

    label: str
    start: int = 0
    stop: Optional[int] = None  # None means "up to the hidden width"
    latent_dim: int = 2
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    noise_variance: float = 0.01

    @field_validator("noise_variance")
    @classmethod
    def validate_noise(cls, v):
        if not isfinite(v) or v <= 0:
            raise InvalidSpecError(f"noise_variance must be > 0, got {v}")
        return v

    @field_validator("latent_dim")
    @classmethod
    def validate_latent_dim(cls, v):
        if v < 1:
            raise InvalidSpecError(f"latent_dim must be >= 1, got {v}")
        return v


class HeadConfig(BaseModel):
    """A parametric guidance head (logistic for discrete labels, gaussian otherwise)."""

    model_config = ConfigDict(extra="forbid")

    label: str
    kind: Literal["logistic", "gaussian"] = "logistic"
    start: int = 0
    stop: Optional[int] = None


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = 0.5
    beta: float = 1.0
    hidden_units: int = 250
    activation: Literal["nrelu", "relu"] = "nrelu"
    corruption: CorruptionSpec = Field(default_factory=CorruptionSpec)
    gp: List[GpGuidanceConfig] = Field(default_factory=list)
    heads: List[HeadConfig] = Field(default_factory=list)
    lr_enabled: bool = False
    guidance_noise: Literal["corrupted", "clean"] = "corrupted"
    seed: int = 0

    @field_validator("alpha", "beta")
    @classmethod
    def validate_unit_interval(cls, v, info):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{info.field_name} must lie in [0, 1], got {v}")
        return v

    @field_validator("hidden_units")
    @classmethod
    def validate_hidden_units(cls, v):
        if v < 1:
            raise ValueError(f"hidden_units must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def validate_partitions(self):
        spans = []
        for i, gp in enumerate(self.gp):
            start, stop = self.gp_partition(i)
            if not 0 <= start < stop <= self.hidden_units:
                raise ValueError(f"gp.{i} partition [{start}, {stop}) outside [0, {self.hidden_units})")
            if gp.latent_dim > stop - start:
                raise ValueError(f"gp.{i} latent_dim {gp.latent_dim} exceeds partition width {stop - start}")
            spans.append((start, stop, i))
        spans.sort()
        for (s0, e0, i0), (s1, e1, i1) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ValueError(f"gp.{i0} and gp.{i1} partitions overlap")
        for i, head in enumerate(self.heads):
            start, stop = self.head_partition(i)
            if not 0 <= start < stop <= self.hidden_units:
                raise ValueError(f"heads.{i} partition [{start}, {stop}) outside [0, {self.hidden_units})")
        return self

    def gp_partition(self, index: int) -> Tuple[int, int]:
        gp = self.gp[index]
        return gp.start, self.hidden_units if gp.stop is None else gp.stop

    def head_partition(self, index: int) -> Tuple[int, int]:
        head = self.heads[index]
        return head.start, self.hidden_units if head.stop is None else head.stop

    @property
    def effective_beta(self) -> float:
        """With parametric guidance disabled the blend collapses to the GP term."""
        return self.beta if self.lr_enabled else 1.0

    def resolved_heads(self, label_kinds: Dict[str, str]) -> List[HeadConfig]:
        """Heads actually trained; one logistic head on the first discrete label when none are listed."""
        if not self.lr_enabled:
            return []
        if self.heads:
            return list(self.heads)
        discrete = [name for name, kind in label_kinds.items() if kind == "discrete"]
        if not discrete:
            raise InvalidSpecError("lr_enabled needs a discrete label set or explicit heads")
        return [HeadConfig(label=discrete[0], kind="logistic")]


class CgOptions(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_iters: int = 3
    gradient_tolerance: float = 1e-10
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_shrinks: int = 50
    max_expansions: int = 10
    restart_period: int = 20

    @field_validator("max_iters", "max_shrinks", "max_expansions")
    @classmethod
    def validate_nonnegative(cls, v, info):
        if v < 0:
            raise ValueError(f"{info.field_name} must be >= 0, got {v}")
        return v

    @field_validator("restart_period")
    @classmethod
    def validate_restart(cls, v):
        if v < 1:
            raise ValueError(f"restart_period must be positive, got {v}")
        return v

    @field_validator("shrink", "sufficient_decrease")
    @classmethod
    def validate_open_unit(cls, v, info):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{info.field_name} must lie in (0, 1), got {v}")
        return v


class OptimizerConfig(BaseModel):
    """Minibatch schedule plus the line-search settings handed to each CG run."""

    model_config = ConfigDict(extra="forbid")

    minibatch_size: int = 350
    cg_iters_per_batch: int = 3
    epochs: int = 1
    gradient_tolerance: float = 1e-10
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_shrinks: int = 50
    restart_period: int = 20

    @field_validator("minibatch_size", "cg_iters_per_batch", "epochs")
    @classmethod
    def validate_positive(cls, v, info):
        if v < 1:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    def cg_options(self) -> CgOptions:
        return CgOptions(
            max_iters=self.cg_iters_per_batch,
            gradient_tolerance=self.gradient_tolerance,
            initial_step=self.initial_step,
            shrink=self.shrink,
            sufficient_decrease=self.sufficient_decrease,
            max_shrinks=self.max_shrinks,
            restart_period=self.restart_period,
        )


class SynthConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    classes: int = 3
    input_dim: int = 20
    train_samples: int = 600
    validation_samples: int = 200
    test_samples: int = 600
    # class templates sit just above the noise floor, well below the nuisance spread
    template_scale: float = 0.2
    elevation_amplitude: float = 3.0
    azimuth_amplitude: float = 3.0
    lighting_gains: FloatList = Field(default_factory=lambda: [0.6, 1.0, 1.4])
    noise_std: float = 1.0
    seed: int = 0

    @model_validator(mode="after")
    def validate_counts(self):
        if self.classes < 2:
            raise ValueError("classes must be >= 2")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if min(self.train_samples, self.validation_samples, self.test_samples) < 0:
            raise ValueError("sample counts must be >= 0")
        if self.train_samples < 1:
            raise ValueError("train_samples must be positive")
        if not self.lighting_gains or min(self.lighting_gains) <= 0:
            raise ValueError("lighting_gains must be a nonempty list of positive gains")
        if self.template_scale <= 0:
            raise ValueError("template_scale must be > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        return self


class DataConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: Literal["delimited", "norb", "synth"] = "synth"
    label_name: str = "class"
    num_classes: Optional[int] = None
    train_features: Optional[str] = None
    train_labels: Optional[str] = None
    validation_features: Optional[str] = None
    validation_labels: Optional[str] = None
    test_features: Optional[str] = None
    test_labels: Optional[str] = None
    norb_train_prefix: Optional[str] = None
    norb_test_prefix: Optional[str] = None
    norb_validation_size: int = 0
    norb_normalize: bool = False
    train_subset: Optional[int] = None
    stratified: bool = True
    standardize: bool = True
    synth: SynthConfig = Field(default_factory=SynthConfig)

    @model_validator(mode="after")
    def validate_paths(self):
        if self.source == "delimited" and not (self.train_features and self.train_labels):
            raise ValueError("delimited source needs train_features and train_labels")
        if self.source == "norb" and not self.norb_train_prefix:
            raise ValueError("norb source needs norb_train_prefix")
        return self


class ProbeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: Optional[str] = None  # None means the first discrete label set
    l2_strength: float = 1e-4
    max_iters: int = 300
    standardize: bool = True
    partitions: bool = True

    @field_validator("l2_strength")
    @classmethod
    def validate_l2(cls, v):
        if v < 0:
            raise ValueError(f"l2_strength must be >= 0, got {v}")
        return v


def _default_axis() -> List[float]:
    return [round(0.1 * i, 1) for i in range(11)]


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alphas: FloatList = Field(default_factory=_default_axis)
    betas: FloatList = Field(default_factory=_default_axis)
    repeats: int = 1

    @field_validator("alphas", "betas")
    @classmethod
    def validate_axis(cls, v, info):
        if not v:
            raise ValueError(f"{info.field_name} must be nonempty")
        for x in v:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{info.field_name} values must lie in [0, 1], got {x}")
        return v

    @field_validator("repeats")
    @classmethod
    def validate_repeats(cls, v):
        if v < 1:
            raise ValueError("repeats must be positive")
        return v


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig = Field(default_factory=ModelConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    probe: ProbeConfig = Field(default_factory=ProbeConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
