"""
`npga export-latent`: latent coordinates of one GP term for plotting.
"""

import os
from pathlib import Path
from typing import Optional

import typer

from commands.common import NpgaError, fail, resolve_out_dir
from npga.errors import InvalidInputError
from npga.evaluation.latent import export_latent
from npga.runner.artifacts import load_checkpoint
from npga.runner.config_loader import load_run_config
from npga.runner.experiment import check_layout, load_splits


def cmd_export_latent(
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Checkpoint written by `npga train`"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file (default: the checkpoint's)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    spec_index: int = typer.Option(0, "--spec-index", help="Which GP term to project through"),
    split: str = typer.Option("test", "--split", help="train, validation or test"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override model.seed"),
):
    """Write Gamma * g(y) plus label columns as a delimited table."""
    try:
        params, stored = load_checkpoint(str(checkpoint))
        run_config = load_run_config(str(config), seed) if config is not None else stored
        if run_config is None:
            raise InvalidInputError("checkpoint carries no config; pass --config")
        splits = load_splits(run_config.data, run_config.model.seed)
        check_layout(params, run_config.model, splits.train)
        dataset = dict(splits.items()).get(split)
        if dataset is None:
            raise InvalidInputError(f"split '{split}' is not available for this data source")
        table = export_latent(dataset, params, run_config.model, spec_index)
        out_dir = resolve_out_dir(out, config, default_name=checkpoint.parent.name or "latent")
        path = os.path.join(out_dir, f"latent_gp{spec_index}_{split}.txt")
        table.to_csv(path, sep=" ", index=False, float_format="%.17g")
    except NpgaError as e:
        fail(e)

    typer.echo(f"✅ Wrote {len(table)} latent rows to {path}")
