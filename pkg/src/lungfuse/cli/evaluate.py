"""CLI: lungfuse eval|bench"""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from lungfuse.cli.options import config_option
from lungfuse.models.evaluation import BenchReport, MetricsReport
from lungfuse.models.labels import LABEL_NAMES

console = Console()


def _load_config(path, seed=None):
    from lungfuse.cli.main import _load_config
    return _load_config(path, seed)


def _run(fn):
    from lungfuse.cli.main import _run
    return _run(fn)


def confusion_table(report: MetricsReport) -> Table:
    table = Table(title=f"{report.method} (seed {report.seed}) accuracy {report.accuracy:.4f}")
    table.add_column("truth \\ pred", style="bold")
    for name in LABEL_NAMES:
        table.add_column(name, justify="right")
    table.add_column("recall", justify="right")
    for name, row, recall in zip(LABEL_NAMES, report.confusion, report.recall):
        table.add_row(name, *(str(c) for c in row), f"{recall:.3f}")
    table.add_row(
        "precision",
        *(f"{p:.3f}" + ("*" if undefined else "") for p, undefined in zip(report.precision, report.undefined_precision)),
        "",
    )
    return table


def bench_tables(report: BenchReport) -> list[Table]:
    accuracy = Table(title=f"Accuracy over seeds {report.seeds}")
    accuracy.add_column("Method", style="bold")
    accuracy.add_column("mean ± sd", justify="right")
    for s in report.summary:
        accuracy.add_row(s.method, f"{s.accuracy_mean:.4f} ± {s.accuracy_sd:.4f}")

    recall = Table(title="Mean per-class recall")
    recall.add_column("Method", style="bold")
    for name in LABEL_NAMES:
        recall.add_column(name, justify="right")
    for s in report.summary:
        recall.add_row(s.method, *(f"{r:.3f}" for r in s.recall_mean))
    return [accuracy, recall]


@click.command("eval")
@click.option("--model", "checkpoint", default=None, type=click.Path(), help="Checkpoint base path.")
@click.option("--combine", nargs=2, default=None, type=click.Path(), metavar="SVM CNN",
              help="Average the probabilities of an SVM and a CNN checkpoint.")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--split", "split_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--selection", "selection_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Directory with pipeline.json and rf_test.csv (fusion, svm).")
@click.option("--seed", type=int, default=0, show_default=True, help="Recorded in metrics.json.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="metrics.json path.")
def eval_cmd(checkpoint, combine, dataset_dir, split_path, selection_dir, seed, out_path):
    """Evaluate a checkpoint (or an SVM+CNN pair) on the test split."""

    def _eval():
        from lungfuse.errors import ArtifactError
        from lungfuse.models.evaluation import SplitDoc
        from lungfuse.selection.pipeline import load_pipeline
        from lungfuse.storage.dataset import load_dataset
        from lungfuse.storage.tables import load_matrix
        from lungfuse.workflow import METRICS_JSON, PIPELINE_JSON, RF_TEST_CSV, evaluate, read_doc

        if bool(checkpoint) == bool(combine):
            raise ArtifactError("pass exactly one of --model or --combine", code="invalid_arguments")
        checkpoints = [checkpoint] if checkpoint else list(combine)
        dataset = load_dataset(dataset_dir)
        split_doc = read_doc(SplitDoc, split_path)
        rf_test, digest = None, None
        if selection_dir:
            _, digest = load_pipeline(Path(selection_dir) / PIPELINE_JSON)
            rf_test = load_matrix(Path(selection_dir) / RF_TEST_CSV)
        out = out_path or Path(checkpoints[0]).parent / METRICS_JSON
        report = evaluate(checkpoints, dataset, split_doc, seed, out, rf_test, digest)
        console.print(confusion_table(report))
        console.print(f"[green]Metrics written to {out}[/green]")

    _run(_eval)


@click.command("bench")
@config_option
@click.option("--seeds", "seeds", multiple=True, type=int, help="Override eval.seeds (repeatable).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--workers", default=1, type=int, show_default=True,
              help="Processes; several seeds run side by side, one seed uses them for extraction and CV.")
def bench(config_path, seeds, out_dir, workers):
    """Run svm, cnn, svm+cnn and fusion end to end over several seeds."""

    def _bench():
        from lungfuse.workflow import run_bench

        cfg = _load_config(config_path)
        report = run_bench(cfg, out_dir, workers, list(seeds) or None)
        for table in bench_tables(report):
            console.print(table)
        if report.fusion_margin is not None:
            console.print(f"fusion − best single source: {report.fusion_margin:+.4f}")

    _run(_bench)
