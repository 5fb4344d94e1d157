"""
`npga grid`: alpha x beta x repeat sweep.
"""

import logging
import os
from pathlib import Path
from typing import Optional

import typer

from commands.common import NpgaError, fail, resolve_out_dir
from npga.runner.artifacts import RESOLVED_CONFIG_FILE
from npga.runner.config_loader import load_run_config, write_resolved_config
from npga.runner.grid import run_grid

logger = logging.getLogger(__name__)


def cmd_grid(
    config: Path = typer.Option(..., "--config", "-c", help="Flat key = value config file"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed; repeat r uses seed + r"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Parallel cells (default NPGA_MAX_WORKERS)"),
):
    """Run the (alpha, beta) grid; rows are written as cells finish."""
    try:
        run_config = load_run_config(str(config), seed)
        out_dir = resolve_out_dir(out, config)
        write_resolved_config(run_config, os.path.join(out_dir, RESOLVED_CONFIG_FILE))
        result = run_grid(run_config, out_dir, max_workers=workers)
    except NpgaError as e:
        fail(e)

    typer.echo(f"✅ Grid finished: {len(result.rows)} rows in {result.rows_path}")
    typer.echo(f"   summary in {result.summary_path}")
    if result.failed:
        typer.echo(f"❌ {result.failed} cell(s) failed, see the error column", err=True)
