"""
Helpers shared by the CLI commands.
"""

import logging
import os
from pathlib import Path
from typing import Optional

import typer

from npga.errors import ConfigError, NpgaError
from npga.models import RunConfig
from npga.runner.config_loader import load_run_config
from npga.settings import get_output_dir

logger = logging.getLogger(__name__)


def resolve_out_dir(out: Optional[Path], config_path: Optional[Path], default_name: str = "run") -> str:
    """--out wins; otherwise <NPGA_OUTPUT_DIR>/<config stem>."""
    if out is not None:
        path = str(out)
    else:
        path = os.path.join(get_output_dir(), config_path.stem if config_path else default_name)
    os.makedirs(path, exist_ok=True)
    return path


def load_config_or_default(config_path: Optional[Path], seed: Optional[int]) -> RunConfig:
    if config_path is None:
        config = RunConfig()
        if seed is not None:
            config = RunConfig.model_validate({**config.model_dump(), "model": {**config.model.model_dump(), "seed": seed}})
        return config
    return load_run_config(str(config_path), seed)


def fail(error: Exception) -> None:
    """Report a domain error and exit non-zero."""
    if isinstance(error, ConfigError) and error.field:
        typer.echo(f"❌ Invalid config field '{error.field}': {error}", err=True)
    else:
        typer.echo(f"❌ {type(error).__name__}: {error}", err=True)
    logger.error(f"Command failed: {error}")
    raise typer.Exit(code=1)


__all__ = ["NpgaError", "fail", "load_config_or_default", "resolve_out_dir"]
