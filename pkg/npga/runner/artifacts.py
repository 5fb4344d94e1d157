"""
Run artifacts: checkpoints, metrics and cost traces.

A checkpoint is two files side by side: `<stem>.json` holds the parameter
layout and the run config, `<stem>.npy` the flat float64 parameter array.
"""

import json
import logging
import os
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from npga.core.objective import ParamLayout, ParamVector
from npga.errors import FormatError, LayoutError
from npga.models import RunConfig

logger = logging.getLogger(__name__)

CHECKPOINT_STEM = "checkpoint"
METRICS_FILE = "metrics.txt"
TRACE_FILE = "trace.csv"
RESOLVED_CONFIG_FILE = "config.resolved.txt"
CHECKPOINT_FORMAT = 1


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext in (".json", ".npy") else path


def save_checkpoint(path: str, params: ParamVector, config: Optional[RunConfig] = None) -> Tuple[str, str]:
    """Write header and parameter array; returns (header_path, array_path)."""
    stem = _stem(path)
    header = {
        "format": CHECKPOINT_FORMAT,
        "size": params.layout.size,
        "layout": params.layout.to_dict(),
        "config": config.model_dump(mode="json") if config is not None else None,
    }
    header_path, array_path = f"{stem}.json", f"{stem}.npy"
    with open(header_path, "w") as f:
        json.dump(header, f, indent=2)
    np.save(array_path, np.asarray(params.values, dtype=np.float64))
    logger.info(f"Saved checkpoint to {header_path}")
    return header_path, array_path


def load_checkpoint(path: str) -> Tuple[ParamVector, Optional[RunConfig]]:
    """Read a checkpoint; the array must match the recorded layout exactly."""
    stem = _stem(path)
    header_path, array_path = f"{stem}.json", f"{stem}.npy"
    for p in (header_path, array_path):
        if not os.path.exists(p):
            raise FormatError(f"{p}: checkpoint file does not exist")
    try:
        with open(header_path) as f:
            header = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{header_path}: malformed checkpoint header: {e}") from e
    if header.get("format") != CHECKPOINT_FORMAT:
        raise FormatError(f"{header_path}: unsupported checkpoint format {header.get('format')}")

    layout = ParamLayout.from_dict(header["layout"])
    values = np.load(array_path, allow_pickle=False)
    if values.ndim != 1 or values.size != layout.size or header.get("size") != layout.size:
        raise LayoutError(f"{array_path}: {values.size} values, layout expects {layout.size}")
    config = RunConfig.model_validate(header["config"]) if header.get("config") else None
    return ParamVector(values.astype(np.float64), layout), config


def write_metrics(path: str, metrics: Mapping[str, float]) -> None:
    """`key = value` lines, keys sorted; floats written with full precision."""
    lines = [f"{key} = {float(value)!r}" for key, value in sorted(metrics.items())]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_metrics(path: str) -> Dict[str, float]:
    if not os.path.exists(path):
        raise FormatError(f"{path}: metrics file does not exist")
    out = {}
    for key, value in dotenv_values(path, interpolate=False).items():
        try:
            out[key] = float(value)
        except (TypeError, ValueError) as e:
            raise FormatError(f"{path}: metric '{key}' is not a number: {value!r}") from e
    return out


def write_trace(path: str, trace: pd.DataFrame) -> None:
    trace.to_csv(path, index=False, float_format="%.17g")


def read_trace(path: str) -> pd.DataFrame:
    return pd.read_csv(path)
