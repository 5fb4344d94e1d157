"""
`npga train`: one training run with probe metrics.
"""

import logging
import os
from pathlib import Path
from typing import Optional

import typer

from commands.common import NpgaError, fail, resolve_out_dir
from npga.runner.artifacts import (
    CHECKPOINT_STEM,
    METRICS_FILE,
    RESOLVED_CONFIG_FILE,
    TRACE_FILE,
    save_checkpoint,
    write_metrics,
    write_trace,
)
from npga.runner.config_loader import load_run_config, write_resolved_config
from npga.runner.experiment import run_experiment

logger = logging.getLogger(__name__)


def cmd_train(
    config: Path = typer.Option(..., "--config", "-c", help="Flat key = value config file"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override model.seed"),
):
    """Train an NPGA and write checkpoint, cost trace and probe metrics."""
    try:
        run_config = load_run_config(str(config), seed)
        out_dir = resolve_out_dir(out, config)
        write_resolved_config(run_config, os.path.join(out_dir, RESOLVED_CONFIG_FILE))
        result = run_experiment(run_config)
        save_checkpoint(os.path.join(out_dir, CHECKPOINT_STEM), result.params, run_config)
        write_trace(os.path.join(out_dir, TRACE_FILE), result.train_result.trace_frame())
        write_metrics(os.path.join(out_dir, METRICS_FILE), result.metrics)
    except NpgaError as e:
        fail(e)

    typer.echo(f"✅ Training finished, artifacts in {out_dir}")
    for key in ("train_accuracy", "val_accuracy", "test_accuracy"):
        if key in result.metrics:
            typer.echo(f"   {key} = {result.metrics[key]:.4f}")
