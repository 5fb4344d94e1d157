"""
Finite-difference checks of the analytic gradients on a small random instance.

Each cost term gets its own model configuration; the noise is drawn once
and held fixed so the cost is a deterministic function of the parameters.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from npga.core import autoencoder as ae
from npga.core.objective import NoiseSample, NpgaObjective, ParamVector, unpack
from npga.data.dataset import Dataset, LabelSet, TargetEncoder, one_hot
from npga.models import CorruptionSpec, GpGuidanceConfig, HeadConfig, KernelSpec, ModelConfig

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
DEFAULT_STEP = 1e-5
TERMS = ("l_auto", "l_gp", "l_lr", "blended")
MAX_DRAWS = 100


@dataclass
class GradcheckReport:
    term: str
    max_rel_error: float
    coordinates: int
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.term:<8} max_rel_error={self.max_rel_error:.3e} coords={self.coordinates} {status}"


def finite_difference_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float = DEFAULT_STEP, coords=None) -> np.ndarray:
    """Central differences of a scalar function at x; coordinates outside `coords` are left at 0."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size) if coords is None else coords:
        plus = flat.copy()
        minus = flat.copy()
        plus[i] += step
        minus[i] -= step
        out[i] = (fn(plus.reshape(x.shape)) - fn(minus.reshape(x.shape))) / (2.0 * step)
    return grad


def relative_errors(analytic, numeric, floor: float = 1e-3) -> np.ndarray:
    """
    |a - n| / max(|a|, |n|, floor * max(1, ||a||_inf)).

    The floor keeps coordinates far below the gradient's own scale from
    being judged on round-off alone.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = floor * max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), scale)


def gradcheck_dataset(rng: np.random.Generator, num_examples: int = 6, input_dim: int = 6) -> Dataset:
    """Tiny dataset with one label set of every kind."""
    classes = np.arange(num_examples) % 3
    rng.shuffle(classes)
    return Dataset(
        rng.standard_normal((num_examples, input_dim)),
        {
            "class": LabelSet("discrete", one_hot(classes, 3)),
            "elevation": LabelSet("continuous", rng.uniform(-1.0, 1.0, num_examples)),
            "azimuth": LabelSet("periodic", rng.uniform(0.0, 2.0 * np.pi, num_examples) % (2.0 * np.pi), period=2.0 * np.pi),
            "lighting": LabelSet("discrete", one_hot(np.arange(num_examples) % 2, 2)),
        },
    )


def gradcheck_models(seed: int = 0, hidden_units: int = 8) -> Dict[str, ModelConfig]:
    """One configuration per cost term; the blended one mixes every guidance kind."""
    quarter = hidden_units // 4
    corruption = CorruptionSpec(scheme="gaussian", gaussian_std=0.1)
    gp_terms = [
        GpGuidanceConfig(label="class", start=0, stop=quarter, latent_dim=2, kernel=KernelSpec(kind="rbf"), noise_variance=0.1),
        GpGuidanceConfig(label="elevation", start=quarter, stop=2 * quarter, latent_dim=1, kernel=KernelSpec(kind="linear"), noise_variance=0.1),
        GpGuidanceConfig(label="azimuth", start=2 * quarter, stop=3 * quarter, latent_dim=1, kernel=KernelSpec(kind="periodic"), noise_variance=0.1),
        GpGuidanceConfig(label="lighting", start=3 * quarter, stop=hidden_units, latent_dim=2, kernel=KernelSpec(kind="arcsine"), noise_variance=0.1),
    ]
    heads = [
        HeadConfig(label="class", kind="logistic", start=0, stop=2 * quarter),
        HeadConfig(label="elevation", kind="gaussian", start=2 * quarter, stop=hidden_units),
    ]
    base = dict(hidden_units=hidden_units, corruption=corruption, seed=seed)
    return {
        "l_auto": ModelConfig(alpha=0.0, **base),
        "l_gp": ModelConfig(alpha=1.0, beta=1.0, gp=gp_terms, **base),
        "l_lr": ModelConfig(alpha=1.0, beta=0.0, lr_enabled=True, heads=heads, **base),
        "blended": ModelConfig(
            alpha=0.5,
            beta=0.5,
            lr_enabled=True,
            heads=heads,
            gp=gp_terms[:2] + [GpGuidanceConfig(label="features", start=2 * quarter, stop=hidden_units, latent_dim=2, noise_variance=0.1)],
            **base,
        ),
    }


def kink_margin(objective: NpgaObjective, params: ParamVector, noise: NoiseSample) -> float:
    """Smallest distance of any rectifier input from zero over the corrupted batch."""
    shifted = ae.pre_activation(noise.corrupted, objective.autoencoder_params(unpack(params)))
    if noise.activation is not None:
        shifted = shifted + noise.activation
    return float(np.min(np.abs(shifted)))


def check_term(
    term: str,
    config: ModelConfig,
    dataset: Dataset,
    rng: np.random.Generator,
    grad_scale: Optional[Mapping[str, float]] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    step: float = DEFAULT_STEP,
) -> Tuple[GradcheckReport, np.ndarray, np.ndarray]:
    objective = NpgaObjective(config, dataset.input_dim, dataset.label_kinds, dataset.label_dims)
    targets = TargetEncoder().fit(dataset).encode(dataset)
    layout = objective.layout
    # every rectifier input must sit further from zero than one difference step can move it
    for _ in range(MAX_DRAWS):
        x = rng.normal(0.0, 0.5, size=layout.size)
        noise = objective.draw_noise(dataset.features, ParamVector(x, layout), rng)
        reach = 10.0 * step * max(1.0, float(np.max(np.abs(noise.corrupted))))
        if kink_margin(objective, ParamVector(x, layout), noise) > reach:
            break
    else:
        logger.warning(f"{term}: no draw kept every hidden unit clear of its kink")

    def cost(v: np.ndarray) -> float:
        return objective.cost_and_grad(dataset.features, targets, ParamVector(v, layout), noise)[0].total

    _, grad = objective.cost_and_grad(dataset.features, targets, ParamVector(x, layout), noise, grad_scale)
    numeric = finite_difference_gradient(cost, x, step)
    errors = relative_errors(grad.values, numeric)
    worst = float(np.max(errors)) if errors.size else 0.0
    report = GradcheckReport(term=term, max_rel_error=worst, coordinates=int(x.size), passed=worst < tolerance)
    return report, grad.values, numeric


def run_gradcheck(
    seed: int = 0,
    grad_scale: Optional[Mapping[str, float]] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    terms=TERMS,
) -> List[GradcheckReport]:
    """Check every cost term; grad_scale deliberately distorts a term's analytic gradient."""
    models = gradcheck_models(seed)
    reports = []
    for term in terms:
        rng = np.random.default_rng([seed, TERMS.index(term)])
        dataset = gradcheck_dataset(rng)
        report, _, _ = check_term(term, models[term], dataset, rng, grad_scale, tolerance)
        logger.info(report.line())
        reports.append(report)
    return reports
