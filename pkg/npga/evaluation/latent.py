"""
Deterministic hidden codes and latent projections for probing and plotting.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from npga.core import autoencoder as ae
from npga.core.objective import ParamVector, unpack
from npga.data.dataset import Dataset
from npga.errors import InvalidInputError
from npga.models import ModelConfig

logger = logging.getLogger(__name__)


def autoencoder_from(params: ParamVector) -> ae.AutoencoderParams:
    blocks = unpack(params)
    return ae.AutoencoderParams(blocks["weight"], blocks["enc_bias"], blocks["dec_bias"])


def hidden_features(dataset: Dataset, params: ParamVector, partition: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Noise-free encoding of every example, optionally restricted to a hidden-unit range."""
    hidden = ae.encode(dataset.features, autoencoder_from(params), mode="deterministic")
    if hidden.ndim == 1:
        hidden = hidden[None, :]
    if partition is not None:
        start, stop = partition
        hidden = hidden[:, start:stop]
    return hidden


def export_latent(dataset: Dataset, params: ParamVector, config: ModelConfig, spec_index: int) -> pd.DataFrame:
    """
    Latent coordinates Gamma * g(y) of one GP term, one row per example.

    Column order: latent_0 .. latent_{H-1}, then one column per label set in
    dataset order (class index for discrete labels, the value itself for
    continuous/periodic labels; multi-column values get a `_m` suffix).
    """
    if not 0 <= spec_index < len(config.gp):
        raise InvalidInputError(f"spec_index {spec_index} out of range for {len(config.gp)} GP terms")
    projection = unpack(params)[f"gp.{spec_index}.projection"]
    coords = hidden_features(dataset, params, config.gp_partition(spec_index)) @ projection.T

    columns = {f"latent_{h}": coords[:, h] for h in range(coords.shape[1])}
    for name, ls in dataset.label_sets.items():
        if ls.kind == "discrete":
            columns[name] = ls.class_indices()
        elif ls.num_columns == 1:
            columns[name] = ls.values[:, 0]
        else:
            for m in range(ls.num_columns):
                columns[f"{name}_{m}"] = ls.values[:, m]
    return pd.DataFrame(columns)
