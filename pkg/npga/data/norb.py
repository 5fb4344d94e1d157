"""
Small-NORB binary matrix files.

Each file starts with a little-endian int32 magic number, an int32 dimension
count and max(ndim, 3) int32 dimension sizes, followed by the row-major
payload. Images (`-dat.mat`) are uint8 matrices N x 2 x 96 x 96, categories
(`-cat.mat`) int32 vectors of length N, and info (`-info.mat`) int32 N x 4
matrices holding instance, elevation index, azimuth index and lighting.
"""

import logging
import os
from typing import Dict, Optional, Tuple

import numpy as np

from npga.data.dataset import Dataset, LabelSet, one_hot
from npga.errors import FormatError

logger = logging.getLogger(__name__)

MAGIC_SINGLE = 0x1E3D4C51
MAGIC_DOUBLE = 0x1E3D4C53
MAGIC_INT = 0x1E3D4C54
MAGIC_BYTE = 0x1E3D4C55
MAGIC_SHORT = 0x1E3D4C56

_DTYPES: Dict[int, np.dtype] = {
    MAGIC_SINGLE: np.dtype("<f4"),
    MAGIC_DOUBLE: np.dtype("<f8"),
    MAGIC_INT: np.dtype("<i4"),
    MAGIC_BYTE: np.dtype("u1"),
    MAGIC_SHORT: np.dtype("<i2"),
}
_MAGICS = {dtype.str: magic for magic, dtype in _DTYPES.items()}

NUM_CLASSES = 5
NUM_LIGHTINGS = 6
ELEVATION_BASE_DEG = 30.0
ELEVATION_STEP_DEG = 5.0
AZIMUTH_STEP_DEG = 10.0  # azimuth indices 0, 2, ..., 34 count 10-degree steps
AZIMUTH_PERIOD_DEG = 360.0


def read_norb_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    return parse_norb_matrix(raw, name=path)


def parse_norb_matrix(raw: bytes, name: str = "<bytes>") -> np.ndarray:
    if len(raw) < 8:
        raise FormatError(f"{name}: truncated header")
    magic, ndim = np.frombuffer(raw[:8], dtype="<i4")
    magic = int(magic) & 0xFFFFFFFF
    if magic not in _DTYPES:
        raise FormatError(f"{name}: bad magic number 0x{magic:08X}")
    if ndim < 1:
        raise FormatError(f"{name}: invalid dimension count {ndim}")
    stored = max(int(ndim), 3)
    header_len = 8 + 4 * stored
    if len(raw) < header_len:
        raise FormatError(f"{name}: truncated dimension list")
    dims = tuple(int(d) for d in np.frombuffer(raw[8:header_len], dtype="<i4")[: int(ndim)])
    if any(d < 0 for d in dims):
        raise FormatError(f"{name}: negative dimension in {dims}")
    dtype = _DTYPES[magic]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    payload = raw[header_len:]
    if len(payload) < expected:
        raise FormatError(f"{name}: truncated payload ({len(payload)} of {expected} bytes)")
    return np.frombuffer(payload[:expected], dtype=dtype).reshape(dims).copy()


def encode_norb_matrix(array: np.ndarray) -> bytes:
    dtype = np.dtype(array.dtype)
    if dtype.itemsize > 1:
        dtype = dtype.newbyteorder("<")
    if dtype.str not in _MAGICS:
        raise FormatError(f"unsupported dtype for NORB matrix: {array.dtype}")
    ndim = array.ndim
    dims = list(array.shape) + [1] * max(0, 3 - ndim)
    header = np.array([_MAGICS[dtype.str], ndim] + dims, dtype="<i4")
    return header.tobytes() + np.ascontiguousarray(array, dtype=dtype).tobytes()


def write_norb_matrix(path: str, array: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(encode_norb_matrix(array))


def contrast_normalize(features: np.ndarray) -> np.ndarray:
    """Per-image mean subtraction and division by the per-image std."""
    mean = features.mean(axis=1, keepdims=True)
    std = features.std(axis=1, keepdims=True)
    return (features - mean) / np.where(std > 0, std, 1.0)


def norb_paths(prefix: str) -> Tuple[str, str, str]:
    """Files named <prefix>-dat.mat, <prefix>-cat.mat and <prefix>-info.mat."""
    return f"{prefix}-dat.mat", f"{prefix}-cat.mat", f"{prefix}-info.mat"


def load_norb(
    image_file: str,
    category_file: str,
    info_file: str,
    split: str = "train",
    normalize: bool = False,
) -> Dataset:
    """
    Load small-NORB files as a Dataset with class, elevation, azimuth and lighting label sets.

    Features are the flattened stereo pair scaled to [0, 1]; normalize=True
    additionally applies per-image contrast normalization.
    """
    for path in (image_file, category_file, info_file):
        if not os.path.exists(path):
            raise FormatError(f"{path}: file does not exist")
    images = read_norb_matrix(image_file)
    categories = read_norb_matrix(category_file).reshape(-1)
    info = read_norb_matrix(info_file)
    N = images.shape[0]
    if categories.shape[0] != N or info.shape[0] != N:
        raise FormatError(f"example counts differ: {N} images, {categories.shape[0]} categories, {info.shape[0]} info rows")
    if info.ndim != 2 or info.shape[1] < 4:
        raise FormatError(f"info matrix must be N x 4, got shape {info.shape}")

    features = images.reshape(N, -1).astype(np.float64) / 255.0
    if normalize:
        features = contrast_normalize(features)
    elevation = ELEVATION_BASE_DEG + ELEVATION_STEP_DEG * info[:, 1].astype(np.float64)
    azimuth = np.mod(AZIMUTH_STEP_DEG * info[:, 2].astype(np.float64), AZIMUTH_PERIOD_DEG)
    label_sets = {
        "class": LabelSet("discrete", one_hot(categories, NUM_CLASSES)),
        "elevation": LabelSet("continuous", elevation),
        "azimuth": LabelSet("periodic", azimuth, period=AZIMUTH_PERIOD_DEG),
        "lighting": LabelSet("discrete", one_hot(info[:, 3], NUM_LIGHTINGS)),
    }
    dataset = Dataset(features, label_sets, split=split, metadata={"image_shape": tuple(images.shape[1:])})
    logger.info(f"Loaded NORB {split}: {N} examples, {features.shape[1]} features")
    return dataset


def write_norb(
    dataset: Dataset,
    image_file: str,
    category_file: str,
    info_file: str,
    image_shape: Optional[Tuple[int, ...]] = None,
) -> None:
    """Write a Dataset with features in [0, 1] back to the three small-NORB files."""
    N, K = dataset.features.shape
    shape = tuple(image_shape or dataset.metadata.get("image_shape") or (K,))
    if int(np.prod(shape)) != K:
        raise FormatError(f"image shape {shape} does not hold {K} features")
    pixels = np.rint(dataset.features * 255.0)
    if np.any(pixels < 0) or np.any(pixels > 255):
        raise FormatError("features must lie in [0, 1] to be written as NORB bytes")
    info = np.zeros((N, 4), dtype="<i4")
    info[:, 1] = np.rint((dataset.label_sets["elevation"].values[:, 0] - ELEVATION_BASE_DEG) / ELEVATION_STEP_DEG)
    info[:, 2] = np.rint(dataset.label_sets["azimuth"].values[:, 0] / AZIMUTH_STEP_DEG)
    info[:, 3] = dataset.label_sets["lighting"].class_indices()
    write_norb_matrix(image_file, pixels.astype(np.uint8).reshape((N,) + shape))
    write_norb_matrix(category_file, dataset.label_sets["class"].class_indices().astype("<i4"))
    write_norb_matrix(info_file, info)
