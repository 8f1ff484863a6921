"""CLI: lungfuse phantom-gen|extract"""

from pathlib import Path

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


@click.command("phantom-gen")
@config_option
@seed_option
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Dataset directory.")
def phantom_gen(config_path, seed, out_dir):
    """Generate a synthetic nodule dataset."""

    def _generate():
        from lungfuse.workflow import generate

        cfg = _load_config(config_path, seed)
        with console.status("Generating phantoms..."):
            dataset = generate(cfg, out_dir)
        table = Table(title=f"Dataset {out_dir} ({len(dataset)} samples)")
        table.add_column("Class", style="bold")
        table.add_column("Count", justify="right")
        for label, count in dataset.histogram().items():
            table.add_row(label.name, str(count))
        console.print(table)

    _run(_generate)


@click.command("extract")
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@config_option
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Feature CSV (default DATASET_DIR/features.csv).")
@click.option("--workers", default=1, type=int, show_default=True, help="Extraction processes.")
def extract_cmd(dataset_dir, config_path, out_path, workers):
    """Extract the radiomics feature table of a dataset."""

    def _extract():
        from lungfuse.storage.dataset import load_dataset
        from lungfuse.workflow import FEATURES_CSV, extract

        cfg = _load_config(config_path)
        out = Path(out_path) if out_path else Path(dataset_dir) / FEATURES_CSV
        dataset = load_dataset(dataset_dir)
        with console.status(f"Extracting features from {len(dataset)} samples..."):
            matrix = extract(dataset, cfg, out, workers)
        console.print(f"[green]Wrote {matrix.shape[0]} × {matrix.shape[1]} features to {out}[/green]")

    _run(_extract)
