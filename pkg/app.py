import logging
from typing import Optional

import typer

from commands import cli
from npga.settings import get_log_level, set_runtime_setting

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@cli.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides NPGA_LOG_LEVEL"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Overrides NPGA_MAX_WORKERS"),
):
    """Nonparametrically guided autoencoder experiments."""
    if log_level is not None:
        set_runtime_setting("log_level", log_level)
    if workers is not None:
        set_runtime_setting("max_workers", workers)
    logging.basicConfig(level=get_log_level(), format=LOG_FORMAT)


app = cli

if __name__ == "__main__":
    app()
