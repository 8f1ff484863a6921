"""CLI: lungfuse select|train"""

from pathlib import Path

import click
from rich.console import Console

from lungfuse.cli.options import config_option, seed_option

console = Console()


def _load_config(path, seed=None):
    from lungfuse.cli.main import _load_config
    return _load_config(path, seed)


def _run(fn):
    from lungfuse.cli.main import _run
    return _run(fn)


@click.command("select")
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@config_option
@seed_option
@click.option("--split", "split_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Existing split.json (otherwise one is drawn and written to --out).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def select_cmd(features_csv, config_path, seed, split_path, out_dir):
    """Fit the selection pipeline on the training rows; write RF tables."""

    def _select():
        from lungfuse.evaluation import make_split
        from lungfuse.models.evaluation import SplitDoc
        from lungfuse.storage.tables import load_matrix
        from lungfuse.workflow import SPLIT_JSON, read_doc, select, write_doc

        cfg = _load_config(config_path, seed)
        features = load_matrix(features_csv)
        if split_path:
            split_doc = read_doc(SplitDoc, split_path)
        else:
            split_doc = make_split(features, cfg.eval.train_fraction, cfg.selection.seed, cfg.eval.stratified)
            write_doc(split_doc, Path(out_dir) / SPLIT_JSON)
        with console.status("Fitting selection pipeline..."):
            pipeline, digest, rf_train, rf_test = select(features, split_doc, cfg, out_dir)
        trace = pipeline.traces()
        console.print(
            f"{len(trace['input'])} → {len(trace['variance'])} (variance) → {len(trace['kbest'])} (k-best) "
            f"→ [bold]{pipeline.width}[/bold] (lasso λ={pipeline.lasso.lam:.4g})"
        )
        console.print(f"[green]Pipeline {digest[:12]} written to {out_dir}[/green]")

    _run(_select)


@click.command("train")
@click.option("--model", "kind", required=True, type=click.Choice(["fusion", "cnn", "svm"]))
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--split", "split_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--selection", "selection_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Directory with pipeline.json and rf_train.csv (fusion, svm).")
@config_option
@seed_option
@click.option("--out", "out_path", required=True, type=click.Path(), help="Checkpoint base path.")
def train_cmd(kind, dataset_dir, split_path, selection_dir, config_path, seed, out_path):
    """Train a fusion, CNN or SVM model on the training split."""

    def _train():
        from lungfuse.models.evaluation import SplitDoc
        from lungfuse.selection.pipeline import load_pipeline
        from lungfuse.storage.dataset import load_dataset
        from lungfuse.storage.tables import load_matrix
        from lungfuse.workflow import PIPELINE_JSON, RF_TRAIN_CSV, read_doc, train

        cfg = _load_config(config_path, seed)
        dataset = load_dataset(dataset_dir)
        split_doc = read_doc(SplitDoc, split_path)
        rf_train, digest = None, None
        if selection_dir:
            _, digest = load_pipeline(Path(selection_dir) / PIPELINE_JSON)
            rf_train = load_matrix(Path(selection_dir) / RF_TRAIN_CSV)
        with console.status(f"Training {kind}..."):
            train(kind, dataset, split_doc, cfg, out_path, rf_train, digest)
        console.print(f"[green]Checkpoint written to {out_path}.json[/green]")

    _run(_train)
