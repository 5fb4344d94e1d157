"""
Covariance functions on the projected latent space.

Four kinds are supported: linear, rbf (squared exponential), arcsine (the
infinite-network covariance) and periodic. Hyperparameters are fixed; only
gradients with respect to the input points are provided.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from npga.errors import InvalidInputError, ShapeError
from npga.models import KernelSpec

logger = logging.getLogger(__name__)


def _as_points(points, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be an N x H matrix with H >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def _augmented_inner(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    # 2 * x~^T Sigma x~' with x~ = (1, x), Sigma = diag(bias_weight, input_weight * I)
    return 2.0 * (spec.bias_weight + spec.input_weight * (a @ b.T))


def _augmented_norm(a: np.ndarray, spec: KernelSpec) -> np.ndarray:
    return 1.0 + 2.0 * (spec.bias_weight + spec.input_weight * np.sum(a * a, axis=1))


def _arcsine_ratio(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    denom = np.sqrt(np.outer(_augmented_norm(a, spec), _augmented_norm(b, spec)))
    return _augmented_inner(a, b, spec) / denom


def gram(points_a, points_b=None, spec: Optional[KernelSpec] = None) -> np.ndarray:
    """
    Gram matrix K[n, m] = C(points_a[n], points_b[m]).

    Pass points_b=None for the symmetric Gram matrix of points_a with itself.
    """
    spec = spec or KernelSpec()
    a = _as_points(points_a, "points_a")
    same = points_b is None
    b = a if same else _as_points(points_b, "points_b")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"point dimensions differ: {a.shape[1]} vs {b.shape[1]}")

    if spec.kind == "linear":
        K = spec.signal_variance * (a @ b.T)
    elif spec.kind == "rbf":
        sq = cdist(a, b, "sqeuclidean")
        K = spec.signal_variance * np.exp(-sq / (2.0 * spec.lengthscale ** 2))
    elif spec.kind == "arcsine":
        ratio = np.clip(_arcsine_ratio(a, b, spec), -1.0, 1.0)
        K = spec.signal_variance * (2.0 / np.pi) * np.arcsin(ratio)
    else:
        r = np.pi * (a[:, None, :] - b[None, :, :]) / spec.period
        K = spec.signal_variance * np.exp(-2.0 * np.sum(np.sin(r) ** 2, axis=2) / spec.lengthscale ** 2)

    if same:
        K = 0.5 * (K + K.T)
    return K


@dataclass
class GramGradient:
    """
    Partial derivatives of a symmetric Gram matrix with respect to its points.

    first_arg[n, m, h] is dC(x_n, x_m)/dx_n[h], the derivative with respect to
    the first argument of the covariance. Because the kernel is symmetric the
    derivative with respect to the second argument is first_arg[m, n, h].
    """

    first_arg: np.ndarray

    def entry_partial(self, n: int, m: int, i: int, h: int) -> float:
        """dK[n, m] / dpoints[i, h]."""
        value = 0.0
        if i == n:
            value += self.first_arg[n, m, h]
        if i == m:
            value += self.first_arg[m, n, h]
        return value

    def full(self) -> np.ndarray:
        """Dense tensor T[n, m, i, h] = dK[n, m] / dpoints[i, h]."""
        N, _, H = self.first_arg.shape
        T = np.zeros((N, N, N, H))
        idx = np.arange(N)
        T[idx, :, idx, :] += self.first_arg
        T[:, idx, idx, :] += np.transpose(self.first_arg, (1, 0, 2))
        return T

    def contract(self, dL_dK: np.ndarray) -> np.ndarray:
        """Chain rule: dL/dpoints given dL/dK (N x N)."""
        S = dL_dK + dL_dK.T
        return np.einsum("nm,nmh->nh", S, self.first_arg)


def gram_grad_points(points, spec: Optional[KernelSpec] = None) -> GramGradient:
    """Gradients of gram(points, None, spec) with respect to every point coordinate."""
    spec = spec or KernelSpec()
    x = _as_points(points, "points")
    diff = x[:, None, :] - x[None, :, :]

    if spec.kind == "linear":
        N = x.shape[0]
        first = spec.signal_variance * np.broadcast_to(x[None, :, :], (N,) + x.shape).copy()
    elif spec.kind == "rbf":
        K = gram(x, None, spec)
        first = -K[:, :, None] * diff / spec.lengthscale ** 2
    elif spec.kind == "arcsine":
        norms = _augmented_norm(x, spec)
        denom = np.sqrt(np.outer(norms, norms))
        u = _augmented_inner(x, x, spec) / denom
        # d u / d x_n = 2w x_m / sqrt(n_n n_m) - 2w u x_n / n_n
        du = (2.0 * spec.input_weight) * (
            x[None, :, :] / denom[:, :, None] - u[:, :, None] * x[:, None, :] / norms[:, None, None]
        )
        scale = spec.signal_variance * (2.0 / np.pi) / np.sqrt(np.clip(1.0 - u ** 2, 1e-300, None))
        first = scale[:, :, None] * du
    else:
        K = gram(x, None, spec)
        r = np.pi * diff / spec.period
        first = K[:, :, None] * (-2.0 / spec.lengthscale ** 2) * np.sin(2.0 * r) * (np.pi / spec.period)

    return GramGradient(first_arg=first)
