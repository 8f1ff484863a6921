"""CLI tests driven through click's test runner."""

import json

import pytest

pytest.importorskip("click")
pytest.importorskip("rich")

from click.testing import CliRunner  # noqa: E402

from lungfuse import __version__  # noqa: E402
from lungfuse.cli.main import main  # noqa: E402

TINY = {
    "phantom": {
        "class_counts": {"AAH": 2, "AIS": 2, "MIA": 2, "IA": 2},
        "patch_size": 12,
        "radius_range": [2.5, 4.0],
    },
    "radiomics": {"wavelet": False},
    "model": {
        "patch_size": 12,
        "embedding_dim": 8,
        "conversion_dim": 8,
        "fusion_dim": 8,
        "stem_channels": 4,
        "encoder_depth": 2,
    },
    "trainer": {"max_epochs": 2},
}


def error_doc(output: str) -> dict:
    lines = [line for line in output.splitlines() if line.startswith('{"error"')]
    assert lines, output
    return json.loads(lines[-1])


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return str(path)


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("phantom-gen", "extract", "select", "train", "eval", "gradcheck", "bench"):
        assert command in result.output


def test_phantom_gen_then_extract_is_deterministic(runner, config_file, tmp_path):
    data_dir = tmp_path / "data"
    result = runner.invoke(main, ["phantom-gen", "--config", config_file, "--seed", "3", "--out", str(data_dir)])
    assert result.exit_code == 0, result.output
    assert (data_dir / "manifest.json").exists()

    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    for out in (first, second):
        result = runner.invoke(main, ["extract", str(data_dir), "--config", config_file, "--out", str(out)])
        assert result.exit_code == 0, result.output
    assert first.read_bytes() == second.read_bytes()
    header = first.read_text().splitlines()[0].split(",")
    assert header[:2] == ["id", "label"]
    assert len(first.read_text().splitlines()) == 9


def test_extract_without_manifest_reports_json_error(runner, config_file, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["extract", str(empty), "--config", config_file])
    assert result.exit_code == 1
    doc = error_doc(result.output)
    assert doc["error"] == "missing_input"
    assert doc["message"]


def test_invalid_config_reports_config_error(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"selection": {"k": 0}}))
    result = runner.invoke(main, ["gradcheck", "--config", str(path)])
    assert result.exit_code == 1
    assert error_doc(result.output)["error"] == "config_error"


def test_gradcheck_passes_on_tiny_model(runner, config_file):
    result = runner.invoke(main, ["gradcheck", "--config", config_file, "--coords", "3"])
    assert result.exit_code == 0, result.output
    assert "softmax_ce" in result.output
    assert "FAIL" not in result.output


# ── full chain ──

CHAIN = {
    "phantom": {
        "class_counts": {"AAH": 4, "AIS": 4, "MIA": 4, "IA": 4},
        "patch_size": 12,
        "radius_range": [2.5, 4.5],
    },
    "radiomics": {"wavelet": False},
    "selection": {"k": 20, "lambda_grid_size": 6, "folds": 3},
    "model": {**TINY["model"], "svm_epochs": 50},
    "trainer": {"max_epochs": 2, "batch_size": 4},
    "eval": {"train_fraction": 0.75, "seeds": [0]},
}


def invoke(runner, *args: str):
    result = runner.invoke(main, list(args))
    assert result.exit_code == 0, result.output
    return result


def test_every_command_chained(runner, tmp_path):
    config = tmp_path / "chain.json"
    config.write_text(json.dumps(CHAIN))
    cfg = str(config)
    data, sel, models = tmp_path / "data", tmp_path / "sel", tmp_path / "models"
    features = data / "features.csv"
    split = sel / "split.json"

    invoke(runner, "phantom-gen", "--config", cfg, "--seed", "0", "--out", str(data))
    invoke(runner, "extract", str(data), "--config", cfg, "--out", str(features))
    invoke(runner, "select", str(features), "--config", cfg, "--seed", "0", "--out", str(sel))
    assert (sel / "pipeline.json").exists() and split.exists()

    common = ["--dataset", str(data), "--split", str(split), "--selection", str(sel)]
    for kind in ("svm", "cnn", "fusion"):
        invoke(runner, "train", "--model", kind, *common, "--config", cfg, "--seed", "0", "--out", str(models / kind))
        assert (models / f"{kind}.json").exists()

    invoke(runner, "eval", "--model", str(models / "fusion"), *common, "--out", str(tmp_path / "fusion.json"))
    fusion = json.loads((tmp_path / "fusion.json").read_text())
    assert fusion["method"] == "fusion"
    assert 0.0 <= fusion["accuracy"] <= 1.0

    invoke(runner, "eval", "--combine", str(models / "svm"), str(models / "cnn"), *common,
           "--out", str(tmp_path / "combined.json"))
    assert json.loads((tmp_path / "combined.json").read_text())["method"] == "svm+cnn"

    # a selection fitted on another split hashes differently
    other = tmp_path / "sel_other"
    invoke(runner, "select", str(features), "--config", cfg, "--seed", "5", "--out", str(other))
    result = runner.invoke(main, [
        "eval", "--model", str(models / "fusion"), "--dataset", str(data), "--split", str(split),
        "--selection", str(other),
    ])
    assert result.exit_code == 1
    doc = error_doc(result.output)
    assert doc["error"] == "pipeline_mismatch"
    assert doc["details"]["expected"] != doc["details"]["got"]

    invoke(runner, "bench", "--config", cfg, "--seeds", "0", "--out", str(tmp_path / "bench"))
    bench = json.loads((tmp_path / "bench" / "bench.json").read_text())
    assert [s["method"] for s in bench["summary"]] == ["svm", "cnn", "svm+cnn", "fusion"]
