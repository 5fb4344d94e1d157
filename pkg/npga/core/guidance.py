"""
Supervised guidance costs on the latent code.

- l_gp_and_grad: GP marginal-likelihood term on a hidden-unit partition seen
  through a low-rank projection Gamma.
- l_lr_and_grad: softmax cross-entropy of a parametric logistic head.
- l_gauss_and_grad: squared error of a parametric linear (gaussian) head.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import log_softmax, softmax

from npga.core.kernels import gram, gram_grad_points
from npga.errors import ConditioningError, InvalidInputError, InvalidLabelError, ShapeError
from npga.models import KernelSpec

logger = logging.getLogger(__name__)

JITTER_SCALE = 1e-8


@dataclass
class GpGuidanceSpec:
    """One GP term: partition [start, stop) of the hidden units, projection Gamma (H x P), kernel and noise."""

    partition: Tuple[int, int]
    projection: np.ndarray
    kernel: KernelSpec
    noise_variance: float
    target_label_set: str

    @property
    def width(self) -> int:
        return self.partition[1] - self.partition[0]

    @property
    def latent_dim(self) -> int:
        return self.projection.shape[0]

    def project(self, hidden_batch: np.ndarray) -> np.ndarray:
        start, stop = self.partition
        return hidden_batch[:, start:stop] @ self.projection.T


@dataclass
class GpTermResult:
    cost: float
    hidden_grad: np.ndarray  # N x P, restricted to the partition
    projection_grad: np.ndarray  # H x P
    jitter: float = 0.0


@dataclass
class HeadSpec:
    """Parametric head: weights (M x P) and bias (M) acting on hidden units [start, stop)."""

    weights: np.ndarray
    bias: np.ndarray
    partition: Tuple[int, int] = (0, -1)

    def slice(self, hidden_batch: np.ndarray) -> np.ndarray:
        start, stop = self.partition
        if stop < 0:
            stop = hidden_batch.shape[1]
        return hidden_batch[:, start:stop]


@dataclass
class HeadTermResult:
    cost: float
    hidden_grad: np.ndarray  # N x P, restricted to the partition
    weights_grad: np.ndarray
    bias_grad: np.ndarray


def cholesky_with_jitter(C: np.ndarray):
    """Cholesky factor of C; one retry with 1e-8 * mean(diag) on the diagonal, then fail."""
    try:
        return cho_factor(C, lower=True, check_finite=True), 0.0
    except (LinAlgError, ValueError):
        jitter = JITTER_SCALE * float(np.mean(np.diag(C)))
        logger.warning(f"Cholesky failed, retrying with jitter {jitter:.3e}")
        try:
            return cho_factor(C + jitter * np.eye(C.shape[0]), lower=True, check_finite=True), jitter
        except (LinAlgError, ValueError) as e:
            raise ConditioningError(f"Cholesky factorization failed: {e}", jitter) from e


def gp_marginal_terms(K: np.ndarray, targets: np.ndarray, noise_variance: float):
    """
    Cost (1/M) sum_m [ln|K + s2 I| + z_m^T (K + s2 I)^-1 z_m] and dL/dK for a fixed Gram matrix.

    Returns (cost, dL_dK, jitter).
    """
    N = K.shape[0]
    M = targets.shape[1]
    C = K + noise_variance * np.eye(N)
    factor, jitter = cholesky_with_jitter(C)
    L = factor[0]
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    alpha = cho_solve(factor, targets)
    cost = log_det + float(np.sum(targets * alpha)) / M
    C_inv = cho_solve(factor, np.eye(N))
    dL_dK = C_inv - (alpha @ alpha.T) / M
    return cost, 0.5 * (dL_dK + dL_dK.T), jitter


def l_gp_and_grad(hidden_batch, spec: GpGuidanceSpec, targets) -> GpTermResult:
    """
    GP marginal-likelihood guidance for one spec.

    Points are Gamma * hidden[n, partition]; gradients flow back through the
    kernel to the projected points, then to Gamma and to the hidden units.
    """
    hidden = np.asarray(hidden_batch, dtype=np.float64)
    Z = np.asarray(targets, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if hidden.ndim != 2 or hidden.shape[0] < 1:
        raise ShapeError(f"hidden_batch must be a nonempty N x J matrix, got {hidden.shape}")
    if Z.shape[0] != hidden.shape[0]:
        raise ShapeError(f"targets have {Z.shape[0]} rows, hidden batch has {hidden.shape[0]}")
    if not np.all(np.isfinite(Z)):
        raise InvalidInputError("GP targets contain non-finite entries")
    start, stop = spec.partition
    if spec.projection.shape[1] != stop - start:
        raise ShapeError(f"projection {spec.projection.shape} does not match partition width {stop - start}")

    X = hidden[:, start:stop]
    V = X @ spec.projection.T
    K = gram(V, None, spec.kernel)
    cost, dL_dK, jitter = gp_marginal_terms(K, Z, spec.noise_variance)

    dL_dV = gram_grad_points(V, spec.kernel).contract(dL_dK)
    return GpTermResult(
        cost=cost,
        hidden_grad=dL_dV @ spec.projection,
        projection_grad=dL_dV.T @ X,
        jitter=jitter,
    )


def _check_one_hot(targets: np.ndarray) -> None:
    ok = np.all((targets == 0.0) | (targets == 1.0), axis=1) & (targets.sum(axis=1) == 1.0)
    if not np.all(ok):
        bad = int(np.flatnonzero(~ok)[0])
        raise InvalidLabelError(f"target row {bad} is not one-hot")


def l_lr_and_grad(hidden_batch, spec: HeadSpec, one_hot_targets) -> HeadTermResult:
    """Mean softmax cross-entropy of the logistic head and its gradients."""
    X = spec.slice(np.asarray(hidden_batch, dtype=np.float64))
    Y = np.asarray(one_hot_targets, dtype=np.float64)
    if Y.shape != (X.shape[0], spec.weights.shape[0]):
        raise ShapeError(f"targets shape {Y.shape} does not match ({X.shape[0]}, {spec.weights.shape[0]})")
    _check_one_hot(Y)
    N = X.shape[0]
    logits = X @ spec.weights.T + spec.bias
    cost = float(-np.sum(Y * log_softmax(logits, axis=1)) / N)
    d_logits = (softmax(logits, axis=1) - Y) / N
    return HeadTermResult(
        cost=cost,
        hidden_grad=d_logits @ spec.weights,
        weights_grad=d_logits.T @ X,
        bias_grad=d_logits.sum(axis=0),
    )


def l_gauss_and_grad(hidden_batch, spec: HeadSpec, targets) -> HeadTermResult:
    """Mean over the batch of the squared error sum_m (w_m x + b_m - z_m)^2."""
    X = spec.slice(np.asarray(hidden_batch, dtype=np.float64))
    Z = np.asarray(targets, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape != (X.shape[0], spec.weights.shape[0]):
        raise ShapeError(f"targets shape {Z.shape} does not match ({X.shape[0]}, {spec.weights.shape[0]})")
    N = X.shape[0]
    residual = X @ spec.weights.T + spec.bias - Z
    cost = float(np.sum(residual * residual) / N)
    d_out = 2.0 * residual / N
    return HeadTermResult(
        cost=cost,
        hidden_grad=d_out @ spec.weights,
        weights_grad=d_out.T @ X,
        bias_grad=d_out.sum(axis=0),
    )
