"""
lungfuse CLI — `lungfuse` command.

Commands:
  lungfuse phantom-gen --out DIR       Synthetic nodule dataset
  lungfuse extract DATASET_DIR         Radiomics feature table
  lungfuse select FEATURES_CSV         Split + selection pipeline + RF tables
  lungfuse train --model KIND          fusion | cnn | svm checkpoint
  lungfuse eval --model CKPT           Metrics and confusion table
  lungfuse gradcheck                   Finite-difference gradient report
  lungfuse bench                       All four methods over the configured seeds
"""

import json
import logging
import sys
from collections.abc import Callable
from typing import Any, Optional

try:
    import click
    from rich.console import Console
    from rich.logging import RichHandler
except ImportError:
    raise SystemExit("CLI requires extras: pip install lungfuse[cli]")

from lungfuse import __version__
from lungfuse.config import RunConfig
from lungfuse.errors import LungFuseError

console = Console()
err_console = Console(stderr=True)


def _setup_logging(verbose: bool) -> None:
    logger = logging.getLogger("lungfuse")
    logger.handlers[:] = [RichHandler(console=err_console, show_path=False)]
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False


def _load_config(path: Optional[str], seed: Optional[int] = None) -> RunConfig:
    cfg = RunConfig.load(path)
    return cfg if seed is None else cfg.with_seed(seed)


def _run(fn: Callable[[], Any]) -> Any:
    """Run a command body; library errors become JSON on stderr and exit code 1."""
    try:
        return fn()
    except LungFuseError as e:
        click.echo(json.dumps(e.to_dict(), default=str), err=True)
        sys.exit(1)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """lungfuse — radiomics + deep-feature fusion for nodule invasiveness grading."""
    _setup_logging(verbose)


# Register subcommands from separate modules
from lungfuse.cli.data import extract_cmd, phantom_gen
from lungfuse.cli.diagnostics import gradcheck
from lungfuse.cli.evaluate import bench, eval_cmd
from lungfuse.cli.train import select_cmd, train_cmd

main.add_command(phantom_gen)
main.add_command(extract_cmd)
main.add_command(select_cmd)
main.add_command(train_cmd)
main.add_command(eval_cmd)
main.add_command(gradcheck)
main.add_command(bench)


if __name__ == "__main__":
    main()
