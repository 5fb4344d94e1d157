"""
Tied-weight denoising autoencoder with a rectified encoder and a linear decoder.

The encoder computes g(y) = max(0, W y + b (+ eps)), the decoder
f(x) = W^T x + c. Noise (input corruption and the NReLU activation noise) is
drawn once and then treated as a constant by every cost/gradient evaluation.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.special import expit

from npga.errors import InvalidInputError, ShapeError
from npga.models import CorruptionSpec

logger = logging.getLogger(__name__)

EncodeMode = Literal["deterministic", "nrelu_noisy"]


@dataclass
class AutoencoderParams:
    """Encoder weight (J x K), encoder bias (J) and decoder bias (K). The decoder uses weight.T."""

    weight: np.ndarray
    enc_bias: np.ndarray
    dec_bias: np.ndarray

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.enc_bias = np.asarray(self.enc_bias, dtype=np.float64)
        self.dec_bias = np.asarray(self.dec_bias, dtype=np.float64)
        J, K = self.weight.shape
        if self.enc_bias.shape != (J,) or self.dec_bias.shape != (K,):
            raise ShapeError(
                f"bias shapes {self.enc_bias.shape}, {self.dec_bias.shape} do not match weight {self.weight.shape}"
            )

    @property
    def hidden_units(self) -> int:
        return self.weight.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def zeros(cls, input_dim: int, hidden_units: int) -> "AutoencoderParams":
        return cls(np.zeros((hidden_units, input_dim)), np.zeros(hidden_units), np.zeros(input_dim))

    @classmethod
    def initialize(cls, input_dim: int, hidden_units: int, rng: np.random.Generator) -> "AutoencoderParams":
        """Weights uniform in [-1/sqrt(K), 1/sqrt(K)], biases zero."""
        bound = 1.0 / np.sqrt(input_dim)
        weight = rng.uniform(-bound, bound, size=(hidden_units, input_dim))
        return cls(weight, np.zeros(hidden_units), np.zeros(input_dim))


@dataclass
class AutoencoderGrad:
    """Gradient of a cost over AutoencoderParams, with the two tied-weight paths kept apart."""

    weight_encoder_path: np.ndarray
    weight_decoder_path: np.ndarray
    enc_bias: np.ndarray
    dec_bias: np.ndarray

    @property
    def weight(self) -> np.ndarray:
        return self.weight_encoder_path + self.weight_decoder_path


@dataclass
class EncoderPass:
    """Cached forward pass: pre-activation, frozen activation noise and hidden code."""

    inputs: np.ndarray
    pre_activation: np.ndarray
    noise: np.ndarray
    hidden: np.ndarray

    @property
    def active(self) -> np.ndarray:
        # subgradient 0 at exactly zero
        return (self.pre_activation + self.noise) > 0.0


def _as_batch(batch, width: int, name: str) -> np.ndarray:
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ShapeError(f"{name} must have {width} columns, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def pre_activation(batch: np.ndarray, params: AutoencoderParams) -> np.ndarray:
    return batch @ params.weight.T + params.enc_bias


def draw_activation_noise(pre_act: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """NReLU noise: eps ~ Normal(0, sigmoid(a)) per unit."""
    return rng.standard_normal(pre_act.shape) * np.sqrt(expit(pre_act))


def forward(batch, params: AutoencoderParams, noise: Optional[np.ndarray] = None) -> EncoderPass:
    """Encode a batch with an optional frozen activation-noise array (None = deterministic)."""
    x = _as_batch(batch, params.input_dim, "batch")
    a = pre_activation(x, params)
    eps = np.zeros_like(a) if noise is None else np.asarray(noise, dtype=np.float64)
    if eps.shape != a.shape:
        raise ShapeError(f"activation noise shape {eps.shape} does not match {a.shape}")
    hidden = np.maximum(a + eps, 0.0)
    return EncoderPass(inputs=x, pre_activation=a, noise=eps, hidden=hidden)


def encode(
    y,
    params: AutoencoderParams,
    mode: EncodeMode = "deterministic",
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Hidden code for a K-vector (or an N x K batch).

    deterministic: max(0, W y + b). nrelu_noisy: max(0, a + eps) with
    eps ~ Normal(0, sigmoid(a)) drawn from rng.
    """
    single = np.ndim(y) == 1
    x = _as_batch(y, params.input_dim, "y")
    if mode == "deterministic":
        out = forward(x, params).hidden
    elif mode == "nrelu_noisy":
        if rng is None:
            raise InvalidInputError("nrelu_noisy encoding needs a random generator")
        a = pre_activation(x, params)
        out = forward(x, params, draw_activation_noise(a, rng)).hidden
    else:
        raise InvalidInputError(f"unknown encode mode: {mode}")
    return out[0] if single else out


def decode(x, params: AutoencoderParams) -> np.ndarray:
    """Linear reconstruction W^T x + c."""
    single = np.ndim(x) == 1
    h = _as_batch(x, params.hidden_units, "x")
    out = h @ params.weight + params.dec_bias
    return out[0] if single else out


def corrupt(batch, spec: CorruptionSpec, rng: np.random.Generator) -> np.ndarray:
    """Gaussian: add i.i.d. noise of std gaussian_std. Mask: zero each entry with probability mask_fraction."""
    x = np.array(batch, dtype=np.float64, copy=True)
    if spec.scheme == "gaussian":
        if spec.gaussian_std == 0.0:
            return x
        return x + rng.normal(0.0, spec.gaussian_std, size=x.shape)
    keep = rng.random(x.shape) >= spec.mask_fraction
    return np.where(keep, x, 0.0)


def reconstruction_cost(
    clean: np.ndarray,
    enc_pass: EncoderPass,
    decoder_weight: np.ndarray,
    dec_bias: np.ndarray,
):
    """
    L_auto = (1/K) sum_n sum_k (y_k - f_k(h))^2 for a cached encoder pass.

    decoder_weight is J x K (the tied case passes the encoder weight).
    Returns (cost, dL/dH, dL/d decoder_weight, dL/d dec_bias).
    """
    K = clean.shape[1]
    residual = enc_pass.hidden @ decoder_weight + dec_bias - clean
    cost = float(np.sum(residual * residual) / K)
    d_out = (2.0 / K) * residual
    d_hidden = d_out @ decoder_weight.T
    d_dec_weight = enc_pass.hidden.T @ d_out
    d_dec_bias = d_out.sum(axis=0)
    return cost, d_hidden, d_dec_weight, d_dec_bias


def encoder_backward(d_hidden: np.ndarray, enc_pass: EncoderPass):
    """Backpropagate dL/dH through the rectifier; returns (dL/dW, dL/db)."""
    d_pre = d_hidden * enc_pass.active
    return d_pre.T @ enc_pass.inputs, d_pre.sum(axis=0)


def l_auto_and_grad(
    clean_batch,
    corrupted_batch,
    params: AutoencoderParams,
    mode: EncodeMode = "deterministic",
    activation_noise: Optional[np.ndarray] = None,
):
    """
    Denoising reconstruction cost and its gradient over the tied parameters.

    The corrupted batch is encoded, the clean batch is the target. In
    nrelu_noisy mode the frozen activation noise must be supplied.
    """
    clean = _as_batch(clean_batch, params.input_dim, "clean_batch")
    corrupted = _as_batch(corrupted_batch, params.input_dim, "corrupted_batch")
    if clean.shape != corrupted.shape:
        raise ShapeError(f"clean {clean.shape} and corrupted {corrupted.shape} batches differ")
    if mode == "nrelu_noisy" and activation_noise is None:
        raise InvalidInputError("nrelu_noisy mode needs the frozen activation noise")
    noise = activation_noise if mode == "nrelu_noisy" else None

    enc_pass = forward(corrupted, params, noise)
    cost, d_hidden, d_dec_weight, d_dec_bias = reconstruction_cost(clean, enc_pass, params.weight, params.dec_bias)
    d_enc_weight, d_enc_bias = encoder_backward(d_hidden, enc_pass)
    return cost, AutoencoderGrad(
        weight_encoder_path=d_enc_weight,
        weight_decoder_path=d_dec_weight,
        enc_bias=d_enc_bias,
        dec_bias=d_dec_bias,
    )
