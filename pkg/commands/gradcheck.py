"""
`npga gradcheck`: finite-difference check of every cost term.
"""

from pathlib import Path
from typing import Dict, List, Optional

import typer

from commands.common import NpgaError, fail, load_config_or_default
from npga.runner.gradcheck import DEFAULT_TOLERANCE, TERMS, run_gradcheck


def _parse_scales(items: List[str]) -> Dict[str, float]:
    scales = {}
    for item in items:
        term, _, factor = item.partition("=")
        if term not in TERMS or not factor:
            raise typer.BadParameter(f"expected TERM=FACTOR with TERM in {TERMS}, got '{item}'")
        scales[term] = float(factor)
    return scales


def cmd_gradcheck(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file (only model.seed is used)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override model.seed"),
    tolerance: float = typer.Option(DEFAULT_TOLERANCE, "--tolerance", help="Maximum relative error"),
    grad_scale: List[str] = typer.Option([], "--grad-scale", hidden=True, help="TERM=FACTOR, distorts a term's gradient"),
):
    """Compare analytic gradients with central finite differences."""
    try:
        run_config = load_config_or_default(config, seed)
        reports = run_gradcheck(run_config.model.seed, _parse_scales(grad_scale), tolerance)
    except NpgaError as e:
        fail(e)

    for report in reports:
        typer.echo(report.line())
    failed = [r.term for r in reports if not r.passed]
    if failed:
        typer.echo(f"❌ Gradient check failed for: {', '.join(failed)}", err=True)
        raise typer.Exit(code=1)
    typer.echo("✅ All gradient checks passed")
