"""
Configuration schemas for npga.

All experiment settings are pydantic models with `extra="forbid"` so that a
misspelled key fails loudly instead of silently falling back to a default.

Example usage:
    from npga.models import ModelConfig, KernelSpec
    cfg = ModelConfig(alpha=0.5, gp=[{"label": "class", "kernel": {"kind": "rbf"}}])
"""

from .config_models import (
    CgOptions,
    CorruptionSpec,
    DataConfig,
    GpGuidanceConfig,
    GridConfig,
    HeadConfig,
    KernelSpec,
    ModelConfig,
    OptimizerConfig,
    ProbeConfig,
    RunConfig,
    SynthConfig,
)

__all__ = [
    "CgOptions",
    "CorruptionSpec",
    "DataConfig",
    "GpGuidanceConfig",
    "GridConfig",
    "HeadConfig",
    "KernelSpec",
    "ModelConfig",
    "OptimizerConfig",
    "ProbeConfig",
    "RunConfig",
    "SynthConfig",
]
