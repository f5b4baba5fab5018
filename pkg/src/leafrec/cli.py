"""Command-line interface for the leaf recognition pipeline."""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from . import features, pipeline, raster, report, synth
from .features import DEFAULT_TAU
from .pipeline import FeatureConfig
from .pnn import ranking_to_dicts


def data_errors_exit_1(fn):
    """Map data/file problems to exit code 1 (usage errors stay exit 2)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Leaf recognition: preprocessing, feature extraction, training,
    classification, evaluation and the annotation service."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("image", type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--level", default=0.95, show_default=True, help="Binarization level in (0,1).")
@data_errors_exit_1
def preprocess(image, out, level):
    """Write gray.png, mask.png and margin.png for IMAGE."""
    config = FeatureConfig(level=level)
    gray, mask, margin = pipeline.preprocess(raster.load_rgb(image), config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    raster.write_png(out_dir / "gray.png", gray)
    raster.write_png(out_dir / "mask.png", mask * 255)
    # boundary displayed as a black curve on white background
    raster.write_png(out_dir / "margin.png", (1 - margin) * 255)
    click.echo(f"wrote gray.png, mask.png, margin.png to {out_dir}")


@main.command()
@click.argument("image", type=click.Path(dir_okay=False))
@click.option("--terminals", required=True, type=click.Path(dir_okay=False),
              help="Terminal sidecar JSON {a:{x,y}, b:{x,y}}.")
@click.option("--tau", default=DEFAULT_TAU, show_default="0.0392", help="Vein residue threshold in (0,1).")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output record JSON.")
@data_errors_exit_1
def extract(image, terminals, tau, out):
    """Extract the 12-feature vector of IMAGE into a JSON record."""
    pair = pipeline.load_terminals(Path(terminals))
    vec = pipeline.extract_image_features(image, pair, FeatureConfig(tau=tau))
    record = features.feature_record(Path(image).name, vec)
    features.write_record(out, record)
    click.echo(json.dumps(record))


@main.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Training manifest CSV/JSON.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output bundle JSON.")
@click.option("--spread", default=0.03, show_default=True, help="PNN spread constant.")
@click.option("--components", default=5, show_default=True, help="Retained principal components.")
@click.option("--level", default=0.95, show_default=True, help="Binarization level in (0,1).")
@click.option("--tau", default=DEFAULT_TAU, show_default="0.0392", help="Vein residue threshold in (0,1).")
@data_errors_exit_1
def train(manifest, out, spread, components, level, tau):
    """Train the full pipeline from a manifest and save the model bundle."""
    bundle = pipeline.train_pipeline(
        pipeline.load_manifest(manifest),
        config=FeatureConfig(level=level, tau=tau),
        spread=spread,
        components=components,
    )
    pipeline.save_bundle(bundle, out)
    click.echo(
        f"trained on {bundle.pnn.weights.shape[0]} samples, "
        f"{len(bundle.class_names)} classes -> {out}"
    )


@main.command()
@click.argument("image", type=click.Path(dir_okay=False))
@click.option("--model", required=True, type=click.Path(dir_okay=False), help="Model bundle JSON.")
@click.option("--terminals", required=True, type=click.Path(dir_okay=False),
              help="Terminal sidecar JSON {a:{x,y}, b:{x,y}}.")
@click.option("--top", default=1, show_default=True, help="How many ranked candidates to output.")
@data_errors_exit_1
def classify(image, model, terminals, top):
    """Classify IMAGE and print the ranked candidates as JSON."""
    bundle = pipeline.load_bundle(model)
    ranking = pipeline.classify_image(
        bundle, image, pipeline.load_terminals(Path(terminals)), k=top
    )
    click.echo(json.dumps({"image": Path(image).name, "ranking": ranking_to_dicts(ranking)}))


@main.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Test manifest CSV/JSON.")
@click.option("--model", required=True, type=click.Path(dir_okay=False), help="Model bundle JSON.")
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False),
              help="Report JSON path; CSV and charts are written alongside.")
@data_errors_exit_1
def evaluate(manifest, model, report_path):
    """Evaluate the bundle on a manifest and write the report files."""
    bundle = pipeline.load_bundle(model)
    result = pipeline.evaluate(pipeline.load_manifest(manifest), bundle)
    paths = report.write_report(result, report_path)
    click.echo(
        f"accuracy {result.accuracy:.4%} ({result.total_incorrect}/{result.total} incorrect); "
        f"wrote {', '.join(str(p) for p in paths.values())}"
    )


@main.command()
@click.option("--model", required=True, type=click.Path(dir_okay=False), help="Model bundle JSON.")
@click.option("--data", required=True, type=click.Path(file_okay=False), help="Image directory to annotate.")
@click.option("--port", default=8000, show_default=True, help="Port to listen on.")
@data_errors_exit_1
def serve(model, data, port):
    """Start the annotation/classification HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(model, data)
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command("synth")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output dataset directory.")
@click.option("--train-per-class", default=30, show_default=True)
@click.option("--test-per-class", default=10, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--size", default=192, show_default=True, help="Image side length, px.")
@data_errors_exit_1
def synth_data(out, train_per_class, test_per_class, seed, size):
    """Generate a procedural demo dataset with terminal sidecars and manifests."""
    train_csv, test_csv = synth.generate_dataset(
        out, train_per_class=train_per_class, test_per_class=test_per_class,
        seed=seed, size=size,
    )
    click.echo(f"wrote {train_csv} and {test_csv}")


if __name__ == "__main__":
    main()
