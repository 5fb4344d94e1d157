"""
CLI commands
Each module holds one command; they are registered on a single Typer app here.
"""

import typer

from .evaluate import cmd_eval
from .export_latent import cmd_export_latent
from .gen_synth import cmd_gen_synth
from .gradcheck import cmd_gradcheck
from .grid import cmd_grid
from .train import cmd_train

cli = typer.Typer(name="npga", help="Nonparametrically guided autoencoder experiments", no_args_is_help=True)

cli.command("train")(cmd_train)
cli.command("grid")(cmd_grid)
cli.command("gradcheck")(cmd_gradcheck)
cli.command("gen-synth")(cmd_gen_synth)
cli.command("export-latent")(cmd_export_latent)
cli.command("eval")(cmd_eval)

__all__ = ["cli"]
