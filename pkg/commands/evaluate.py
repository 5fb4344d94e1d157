"""
`npga eval`: probe an existing checkpoint.
"""

import os
from pathlib import Path
from typing import Optional

import typer

from commands.common import NpgaError, fail, resolve_out_dir
from npga.errors import InvalidInputError
from npga.runner.artifacts import METRICS_FILE, load_checkpoint, write_metrics
from npga.runner.config_loader import load_run_config
from npga.runner.experiment import check_layout, evaluate_params, load_splits


def cmd_eval(
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Checkpoint written by `npga train`"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file (default: the checkpoint's)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override model.seed"),
):
    """Fit linear probes on the checkpoint's hidden code and write metrics."""
    try:
        params, stored = load_checkpoint(str(checkpoint))
        run_config = load_run_config(str(config), seed) if config is not None else stored
        if run_config is None:
            raise InvalidInputError("checkpoint carries no config; pass --config")
        splits = load_splits(run_config.data, run_config.model.seed)
        check_layout(params, run_config.model, splits.train)
        metrics = evaluate_params(params, splits, run_config)
        out_dir = resolve_out_dir(out, config, default_name=checkpoint.parent.name or "eval")
        write_metrics(os.path.join(out_dir, METRICS_FILE), metrics)
    except NpgaError as e:
        fail(e)

    typer.echo(f"✅ Metrics written to {os.path.join(out_dir, METRICS_FILE)}")
    for key in ("train_accuracy", "val_accuracy", "test_accuracy"):
        if key in metrics:
            typer.echo(f"   {key} = {metrics[key]:.4f}")
