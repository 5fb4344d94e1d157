"""
Linear (logistic) probes on frozen representations.

The probe minimizes mean softmax cross-entropy + l2_strength * ||W||^2 with
the package's CG minimizer. Features are standardized with the probe's own
training statistics unless standardize=False.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from npga.core.optimizer import cg_minimize
from npga.errors import ShapeError
from npga.models import CgOptions

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = CgOptions(max_iters=300, gradient_tolerance=1e-8)


@dataclass
class ProbeParams:
    weights: np.ndarray  # M x F
    bias: np.ndarray  # M
    feature_mean: Optional[np.ndarray] = None
    feature_scale: Optional[np.ndarray] = None

    def prepare(self, features) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.weights.shape[1]:
            raise ShapeError(f"features must have {self.weights.shape[1]} columns, got shape {X.shape}")
        if self.feature_mean is not None:
            X = (X - self.feature_mean) / self.feature_scale
        return X

    def logits(self, features) -> np.ndarray:
        return self.prepare(features) @ self.weights.T + self.bias

    def predict(self, features) -> np.ndarray:
        # argmax breaks ties towards the lowest class index
        return np.argmax(self.logits(features), axis=1)


def _probe_cost_and_grad(theta: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
    N, F = X.shape
    M = Y.shape[1]
    W = theta[: M * F].reshape(M, F)
    b = theta[M * F :]
    logits = X @ W.T + b
    cost = -np.sum(Y * log_softmax(logits, axis=1)) / N + l2 * np.sum(W * W)
    d_logits = (softmax(logits, axis=1) - Y) / N
    dW = d_logits.T @ X + 2.0 * l2 * W
    db = d_logits.sum(axis=0)
    return float(cost), np.concatenate([dW.ravel(), db])


def probe_cost(probe: ProbeParams, features, one_hot_labels, l2_strength: float = 0.0) -> float:
    """Regularized cross-entropy of a fitted probe on (features, labels)."""
    X = probe.prepare(features)
    theta = np.concatenate([probe.weights.ravel(), probe.bias])
    cost, _ = _probe_cost_and_grad(theta, X, np.asarray(one_hot_labels, dtype=np.float64), l2_strength)
    return cost


def fit_probe(
    features,
    one_hot_labels,
    l2_strength: float = 1e-4,
    budget: Optional[CgOptions] = None,
    seed: int = 0,
    standardize: bool = True,
) -> ProbeParams:
    """Fit a multinomial logistic regression probe; deterministic given seed."""
    X = np.asarray(features, dtype=np.float64)
    Y = np.asarray(one_hot_labels, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeError(f"features {X.shape} and labels {Y.shape} do not agree")
    N, F = X.shape
    M = Y.shape[1]

    mean = scale = None
    if standardize:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.where(std > 0, std, 1.0)
        X = (X - mean) / scale

    rng = np.random.default_rng(seed)
    theta0 = np.concatenate([1e-3 * rng.standard_normal(M * F), np.zeros(M)])
    result = cg_minimize(lambda t: _probe_cost_and_grad(t, X, Y, l2_strength), theta0, budget or DEFAULT_BUDGET)
    theta = result.x
    if result.degraded:
        logger.warning("Probe fit stopped early: line search made no further progress")
    logger.debug(f"Probe fit: {result.iterations} CG iterations, final cost {result.trace[-1]:.6g}")
    return ProbeParams(
        weights=theta[: M * F].reshape(M, F).copy(),
        bias=theta[M * F :].copy(),
        feature_mean=mean,
        feature_scale=scale,
    )


def probe_accuracy(probe: ProbeParams, features, labels) -> float:
    """Fraction of rows whose argmax prediction matches; labels may be one-hot or class indices."""
    y = np.asarray(labels)
    if y.ndim == 2:
        y = np.argmax(y, axis=1)
    pred = probe.predict(features)
    if pred.shape[0] != y.shape[0]:
        raise ShapeError(f"{pred.shape[0]} predictions for {y.shape[0]} labels")
    if y.size == 0:
        return float("nan")
    return float(np.mean(pred == y))
