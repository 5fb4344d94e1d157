"""
Flat key-value experiment config files.

    # oil flow, NPGA corner of the grid
    model.alpha = 0.5
    model.gp.0.label = class
    model.gp.0.kernel.kind = rbf
    grid.alphas = 0,0.5,1

Keys are dotted paths into RunConfig; numeric components index lists.
Unknown keys are errors.
"""

import logging
import os
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from dotenv.parser import parse_stream
from pydantic import ValidationError

from npga.errors import ConfigError
from npga.models import RunConfig

logger = logging.getLogger(__name__)

_NONE_TOKENS = {"", "none", "null"}


def _insert(tree: Dict[str, Any], parts: List[str], value: Any, key: str) -> None:
    node = tree
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError("key is both a value and a section", field=key)
        node = child
    node[parts[-1]] = value


def _check_repeated_keys(path: str) -> None:
    """dotenv_values keeps the last of repeated keys; a config file must set each key once."""
    first_seen: Dict[str, int] = {}
    with open(path, "r") as f:
        for binding in parse_stream(f):
            if binding.key is None:
                continue
            if binding.key in first_seen:
                raise ConfigError(
                    f"set on line {first_seen[binding.key]} and again on line {binding.original.line}", field=binding.key
                )
            first_seen[binding.key] = binding.original.line


def _listify(node: Any, path: str = "") -> Any:
    """Turn dicts whose keys are all integers into lists."""
    if not isinstance(node, dict):
        return node
    out = {k: _listify(v, f"{path}.{k}" if path else k) for k, v in node.items()}
    if out and all(k.isdigit() for k in out):
        indices = sorted(int(k) for k in out)
        if indices != list(range(len(indices))):
            raise ConfigError(f"list indices must run 0..{len(indices) - 1}, got {indices}", field=path)
        return [out[str(i)] for i in indices]
    return out


def flat_to_nested(flat: Dict[str, Optional[str]]) -> Dict[str, Any]:
    tree: Dict[str, Any] = {}
    for key, raw in flat.items():
        parts = key.strip().split(".")
        if any(not p for p in parts):
            raise ConfigError("malformed key", field=key)
        value = None if raw is None or raw.strip().lower() in _NONE_TOKENS else raw.strip()
        if value is None:
            continue
        _insert(tree, parts, value, key)
    return _listify(tree)


def parse_run_config(flat: Dict[str, Optional[str]]) -> RunConfig:
    nested = flat_to_nested(flat)
    try:
        return RunConfig.model_validate(nested)
    except ValidationError as e:
        err = e.errors()[0]
        field = ".".join(str(p) for p in err["loc"])
        raise ConfigError(err["msg"], field=field) from e


def load_run_config(path: str, seed: Optional[int] = None) -> RunConfig:
    """Parse and validate a config file; `seed` overrides model.seed."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    _check_repeated_keys(path)
    flat = dict(dotenv_values(path, interpolate=False))
    if seed is not None:
        flat["model.seed"] = str(seed)
    config = parse_run_config(flat)
    logger.info(f"Loaded config from {path}")
    return config


def _flatten(node: Any, prefix: str, out: Dict[str, str]) -> None:
    if isinstance(node, dict):
        for k, v in node.items():
            _flatten(v, f"{prefix}.{k}" if prefix else k, out)
    elif isinstance(node, list):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in node) and node:
            out[prefix] = ",".join(repr(float(v)) for v in node)
        else:
            for i, v in enumerate(node):
                _flatten(v, f"{prefix}.{i}", out)
    elif node is None:
        return
    elif isinstance(node, float):
        out[prefix] = repr(node)
    else:
        out[prefix] = str(node).lower() if isinstance(node, bool) else str(node)


def config_to_flat(config: RunConfig) -> Dict[str, str]:
    out: Dict[str, str] = {}
    _flatten(config.model_dump(mode="python"), "", out)
    return out


def write_resolved_config(config: RunConfig, path: str) -> None:
    """Echo the effective config (defaults resolved) in the same flat format."""
    lines = ["# effective configuration, defaults resolved"]
    lines += [f"{key} = {value}" for key, value in config_to_flat(config).items()]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
