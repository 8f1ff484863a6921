"""CLI: lungfuse gradcheck"""

import sys

import click
from rich.console import Console
from rich.table import Table

from lungfuse.cli.options import config_option, seed_option

console = Console()


def _load_config(path, seed=None):
    from lungfuse.cli.main import _load_config
    return _load_config(path, seed)


def _run(fn):
    from lungfuse.cli.main import _run
    return _run(fn)


@click.command("gradcheck")
@config_option
@seed_option
@click.option("--coords", default=10, type=int, show_default=True, help="Coordinates per model tensor.")
def gradcheck(config_path, seed, coords):
    """Compare analytic gradients with central finite differences."""

    def _check() -> bool:
        from lungfuse.diagnostics import LAYER_TOLERANCE, MODEL_TOLERANCE, layer_gradchecks, model_gradcheck

        cfg = _load_config(config_path, seed)
        s = cfg.trainer.seed
        table = Table(title="Gradient check (max relative error)")
        table.add_column("Check", style="bold")
        table.add_column("Error", justify="right")
        table.add_column("Limit", justify="right")
        table.add_column("Result")
        ok = True
        with console.status("Checking layers..."):
            rows = [(name, err, LAYER_TOLERANCE) for name, err in layer_gradchecks(s).items()]
        with console.status("Checking fusion model..."):
            rows += [(f"fusion.{name}", err, MODEL_TOLERANCE) for name, err in model_gradcheck(cfg.model, seed=s, coords_per_tensor=coords).items()]
        for name, err, limit in rows:
            passed = err < limit
            ok &= passed
            table.add_row(name, f"{err:.2e}", f"{limit:.0e}", "[green]pass[/green]" if passed else "[red]FAIL[/red]")
        console.print(table)
        return ok

    if not _run(_check):
        sys.exit(1)
