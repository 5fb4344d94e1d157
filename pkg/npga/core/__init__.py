"""
Numerical core of the nonparametrically guided autoencoder.

- kernels: covariance functions and their point gradients
- autoencoder: tied-weight denoising autoencoder
- guidance: GP marginal-likelihood and parametric head costs
- objective: blended cost over a flat parameter vector
- optimizer: nonlinear conjugate gradient and minibatch training
"""

from .autoencoder import AutoencoderParams, corrupt, decode, encode, l_auto_and_grad
from .guidance import GpGuidanceSpec, HeadSpec, l_gauss_and_grad, l_gp_and_grad, l_lr_and_grad
from .kernels import GramGradient, gram, gram_grad_points
from .objective import NpgaObjective, ParamLayout, ParamVector, pack, unpack
from .optimizer import CgResult, TrainResult, cg_minimize, train

__all__ = [
    "AutoencoderParams",
    "CgResult",
    "GpGuidanceSpec",
    "GramGradient",
    "HeadSpec",
    "NpgaObjective",
    "ParamLayout",
    "ParamVector",
    "TrainResult",
    "cg_minimize",
    "corrupt",
    "decode",
    "encode",
    "gram",
    "gram_grad_points",
    "l_auto_and_grad",
    "l_gauss_and_grad",
    "l_gp_and_grad",
    "l_lr_and_grad",
    "pack",
    "train",
    "unpack",
]
