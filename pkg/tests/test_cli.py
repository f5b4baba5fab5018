from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from leafrec import pipeline, raster, synth
from leafrec.cli import main


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("clidata")
    train_csv, test_csv = synth.generate_dataset(
        root, train_per_class=4, test_per_class=2, seed=23, size=128
    )
    bundle_path = root / "bundle.json"
    bundle = pipeline.train_pipeline(pipeline.load_manifest(train_csv))
    pipeline.save_bundle(bundle, bundle_path)
    sample = pipeline.load_manifest(test_csv).entries[0]
    return {
        "root": root,
        "train_csv": train_csv,
        "test_csv": test_csv,
        "bundle": bundle_path,
        "image": sample.image,
        "terminals": sample.terminals,
        "label": sample.label,
    }


@pytest.fixture
def runner():
    return CliRunner()


class TestPreprocess:
    def test_writes_three_images_with_display_polarity(self, runner, cli_dataset, tmp_path):
        out = tmp_path / "pre"
        result = runner.invoke(
            main, ["preprocess", str(cli_dataset["image"]), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        gray = raster.load_rgb(out / "gray.png")
        mask = raster.load_rgb(out / "mask.png")
        margin = raster.load_rgb(out / "margin.png")
        assert gray.shape == mask.shape == margin.shape
        # mask: leaf white on black; margin: black boundary on white
        assert set(np.unique(mask)) <= {0, 255}
        corners = margin[0, 0, 0], margin[-1, -1, 0]
        assert corners == (255, 255)
        assert (margin == 0).any()

    def test_bad_level_is_data_error(self, runner, cli_dataset, tmp_path):
        result = runner.invoke(
            main,
            ["preprocess", str(cli_dataset["image"]), "--out", str(tmp_path), "--level", "1.5"],
        )
        assert result.exit_code == 1

    def test_missing_out_is_usage_error(self, runner, cli_dataset):
        result = runner.invoke(main, ["preprocess", str(cli_dataset["image"])])
        assert result.exit_code == 2


class TestExtract:
    def test_writes_record(self, runner, cli_dataset, tmp_path):
        out = tmp_path / "features.json"
        result = runner.invoke(
            main,
            [
                "extract",
                str(cli_dataset["image"]),
                "--terminals",
                str(cli_dataset["terminals"]),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        record = json.loads(out.read_text())
        assert record["image_id"] == cli_dataset["image"].name
        assert len(record["features"]) == 12
        assert json.loads(result.output)["features"] == record["features"]


class TestTrainClassifyEvaluate:
    def test_train_then_classify(self, runner, cli_dataset, tmp_path):
        bundle_path = tmp_path / "bundle.json"
        result = runner.invoke(
            main,
            [
                "train",
                "--manifest",
                str(cli_dataset["train_csv"]),
                "--out",
                str(bundle_path),
            ],
        )
        assert result.exit_code == 0, result.output
        assert bundle_path.exists()

        result = runner.invoke(
            main,
            [
                "classify",
                str(cli_dataset["image"]),
                "--model",
                str(bundle_path),
                "--terminals",
                str(cli_dataset["terminals"]),
                "--top",
                "3",
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert len(payload["ranking"]) == 3
        assert payload["ranking"][0]["class_name"] == cli_dataset["label"]
        scores = [r["score"] for r in payload["ranking"]]
        assert scores == sorted(scores, reverse=True)

    def test_evaluate_writes_report_files(self, runner, cli_dataset, tmp_path):
        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main,
            [
                "evaluate",
                "--manifest",
                str(cli_dataset["test_csv"]),
                "--model",
                str(cli_dataset["bundle"]),
                "--report",
                str(report_path),
            ],
        )
        assert result.exit_code == 0, result.output
        assert report_path.exists()
        assert report_path.with_suffix(".csv").exists()
        assert (tmp_path / "report_errors.png").exists()
        assert (tmp_path / "report_accuracy.png").exists()
        saved = json.loads(report_path.read_text())
        assert 0.0 <= saved["accuracy"] <= 1.0
        assert len(saved["per_class"]) == 5

    def test_missing_model_file_is_data_error(self, runner, cli_dataset):
        result = runner.invoke(
            main,
            [
                "classify",
                str(cli_dataset["image"]),
                "--model",
                "no-such-bundle.json",
                "--terminals",
                str(cli_dataset["terminals"]),
            ],
        )
        assert result.exit_code == 1

    def test_unknown_command_is_usage_error(self, runner):
        assert runner.invoke(main, ["frobnicate"]).exit_code == 2


class TestSynthCommand:
    def test_generates_dataset(self, runner, tmp_path):
        result = runner.invoke(
            main,
            [
                "synth",
                "--out",
                str(tmp_path / "demo"),
                "--train-per-class",
                "1",
                "--test-per-class",
                "1",
                "--size",
                "96",
            ],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "demo" / "train.csv").exists()
        assert (tmp_path / "demo" / "test.csv").exists()
        pngs = list((tmp_path / "demo").glob("*.png"))
        assert len(pngs) == 10
