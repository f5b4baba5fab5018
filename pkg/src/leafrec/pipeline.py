"""End-to-end orchestration: dataset manifests, training, evaluation and
model-bundle persistence."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import features, pca, pnn, raster
from .features import DEFAULT_TAU, ExtractionError
from .geometry import TerminalPair
from .pnn import RankedClass

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureConfig:
    level: float = 0.95
    tau: float = DEFAULT_TAU
    smooth_kernel: int = 3
    smooth_factor_kernels: tuple[int, int] = (5, 2)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "tau": self.tau,
            "smooth_kernel": self.smooth_kernel,
            "smooth_factor_kernels": list(self.smooth_factor_kernels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(
            level=float(d["level"]),
            tau=float(d["tau"]),
            smooth_kernel=int(d["smooth_kernel"]),
            smooth_factor_kernels=tuple(int(k) for k in d["smooth_factor_kernels"]),
        )


@dataclass(frozen=True)
class ManifestEntry:
    image: Path
    terminals: Path | TerminalPair
    label: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    class_names: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("manifest has no entries")
        labels = sorted({e.label for e in self.entries})
        object.__setattr__(self, "class_names", tuple(labels))

    def class_index(self, label: str) -> int:
        return self.class_names.index(label)


def load_manifest(path: str | Path) -> Manifest:
    """Read a CSV (header image,terminals,label) or JSON manifest.

    Relative image/terminal paths are resolved against the manifest's
    directory. JSON entries may inline terminals as {a:{x,y}, b:{x,y}}.
    """
    path = Path(path)
    base = path.parent
    entries: list[ManifestEntry] = []
    if path.suffix.lower() == ".json":
        for i, row in enumerate(json.loads(path.read_text(encoding="utf-8"))):
            terminals = row["terminals"]
            if isinstance(terminals, dict):
                terminals = TerminalPair.from_dict(terminals)
            else:
                terminals = base / terminals
            entries.append(
                ManifestEntry(image=base / row["image"], terminals=terminals, label=str(row["label"]))
            )
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"image", "terminals", "label"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ValueError(
                    f"manifest {path} must have header columns image,terminals,label"
                )
            for row in reader:
                entries.append(
                    ManifestEntry(
                        image=base / row["image"],
                        terminals=base / row["terminals"],
                        label=row["label"],
                    )
                )
    return Manifest(entries=tuple(entries))


def load_terminals(source: Path | TerminalPair) -> TerminalPair:
    if isinstance(source, TerminalPair):
        return source
    data = json.loads(Path(source).read_text(encoding="utf-8"))
    return TerminalPair.from_dict(data)


def preprocess(rgb: np.ndarray, config: FeatureConfig = FeatureConfig()):
    """RGB image -> (gray, smoothed leaf mask, margin mask)."""
    gray = raster.to_grayscale(rgb)
    mask = raster.smooth_mask(raster.binarize(gray, config.level), config.smooth_kernel)
    margin = raster.extract_margin(mask)
    return gray, mask, margin


def extract_image_features(
    image_path: str | Path,
    terminals: TerminalPair,
    config: FeatureConfig = FeatureConfig(),
) -> np.ndarray:
    gray, mask, margin = preprocess(raster.load_rgb(image_path), config)
    return features.extract_features(
        gray, mask, margin, terminals,
        tau=config.tau, smooth_factor_kernels=config.smooth_factor_kernels,
    )


@dataclass(frozen=True)
class ModelBundle:
    pca: pca.PcaModel
    pnn: pnn.PnnModel
    pc_minmax: np.ndarray  # (m, 2) per-dimension (min, max) of training scores
    feature_config: FeatureConfig
    class_names: tuple[str, ...]

    def __post_init__(self):
        if self.pca.m != self.pnn.input_dim:
            raise ValueError(
                f"bundle invariant violated: pca.m={self.pca.m} != pnn.input_dim={self.pnn.input_dim}"
            )
        if not (self.pc_minmax[:, 0] < self.pc_minmax[:, 1]).all():
            raise ValueError("bundle invariant violated: pc_minmax mins must be < maxes")

    def scale_scores(self, scores: np.ndarray) -> np.ndarray:
        lo, hi = self.pc_minmax[:, 0], self.pc_minmax[:, 1]
        return (scores - lo) / (hi - lo)


def train_pipeline(
    manifest: Manifest,
    config: FeatureConfig = FeatureConfig(),
    spread: float = pnn.DEFAULT_SPREAD,
    components: int = pca.DEFAULT_COMPONENTS,
) -> ModelBundle:
    """Extract features for every manifest entry, fit the PCA reduction,
    min-max scale the scores and assemble the PNN.

    Entries whose extraction fails are logged and skipped; unreadable files
    abort with the offending path.
    """
    vectors: list[np.ndarray] = []
    labels: list[int] = []
    for entry in manifest.entries:
        if not Path(entry.image).exists():
            raise FileNotFoundError(f"image file not found: {entry.image}")
        try:
            vec = extract_image_features(entry.image, load_terminals(entry.terminals), config)
        except ExtractionError as exc:
            log.warning("skipping %s: %s", entry.image, exc)
            continue
        vectors.append(vec)
        labels.append(manifest.class_index(entry.label))
    if not vectors:
        raise ValueError("all samples failed feature extraction")
    if len(vectors) < 2:
        raise ValueError("a single usable sample cannot train the pipeline")

    data = np.vstack(vectors)
    pca_model = pca.fit(data, m=components)
    scores = pca.project(pca_model, data)
    lo = scores.min(axis=0)
    hi = scores.max(axis=0)
    if not (lo < hi).all():
        raise ValueError("degenerate principal scores: a component is constant over training data")
    pc_minmax = np.column_stack([lo, hi])
    scaled = (scores - lo) / (hi - lo)
    pnn_model = pnn.train(
        list(zip(scaled, labels)), spread=spread, class_names=manifest.class_names
    )
    return ModelBundle(
        pca=pca_model,
        pnn=pnn_model,
        pc_minmax=pc_minmax,
        feature_config=config,
        class_names=manifest.class_names,
    )


def classify_features(bundle: ModelBundle, vec: np.ndarray, k: int = 1):
    scores = pca.project(bundle.pca, vec)
    return pnn.classify(bundle.pnn, bundle.scale_scores(scores), k=k)


def classify_image(
    bundle: ModelBundle,
    image_path: str | Path,
    terminals: TerminalPair,
    k: int = 1,
) -> list[RankedClass]:
    vec = extract_image_features(image_path, terminals, bundle.feature_config)
    _, ranking = classify_features(bundle, vec, k=k)
    return ranking


@dataclass(frozen=True)
class ClassResult:
    label: str
    test_count: int
    incorrect: int

    def __post_init__(self):
        if self.test_count < 0 or not 0 <= self.incorrect <= self.test_count:
            raise ValueError(
                f"invalid counts for {self.label}: {self.incorrect}/{self.test_count}"
            )


@dataclass(frozen=True)
class EvaluationReport:
    per_class: tuple[ClassResult, ...]
    accuracy: float

    @property
    def total(self) -> int:
        return sum(r.test_count for r in self.per_class)

    @property
    def total_incorrect(self) -> int:
        return sum(r.incorrect for r in self.per_class)

    def to_dict(self) -> dict:
        return {
            "per_class": [
                {"class": r.label, "test_count": r.test_count, "incorrect": r.incorrect}
                for r in self.per_class
            ],
            "accuracy": self.accuracy,
            "total": self.total,
            "total_incorrect": self.total_incorrect,
        }


def report_from_counts(
    class_names: Sequence[str],
    test_counts: Sequence[int],
    incorrect_counts: Sequence[int],
) -> EvaluationReport:
    """Assemble a report from per-class tallies; accuracy = 1 - errors/tests."""
    if not (len(class_names) == len(test_counts) == len(incorrect_counts)):
        raise ValueError("class names and count vectors must have equal length")
    per_class = tuple(
        ClassResult(label, int(n), int(bad))
        for label, n, bad in zip(class_names, test_counts, incorrect_counts)
    )
    total = sum(test_counts)
    if total == 0:
        raise ValueError("no test samples")
    return EvaluationReport(per_class=per_class, accuracy=1.0 - sum(incorrect_counts) / total)


def evaluate(manifest: Manifest, bundle: ModelBundle) -> EvaluationReport:
    """Classify every manifest entry and tally per-class errors.

    Entries whose extraction fails count as incorrect.
    """
    unknown = set(manifest.class_names) - set(bundle.class_names)
    if unknown:
        raise ValueError(f"manifest classes missing from the bundle: {sorted(unknown)}")
    tests = {label: 0 for label in manifest.class_names}
    errors = {label: 0 for label in manifest.class_names}
    for entry in manifest.entries:
        if not Path(entry.image).exists():
            raise FileNotFoundError(f"image file not found: {entry.image}")
        tests[entry.label] += 1
        try:
            ranking = classify_image(bundle, entry.image, load_terminals(entry.terminals), k=1)
            predicted = ranking[0].name
        except ExtractionError as exc:
            log.warning("extraction failed for %s, counted incorrect: %s", entry.image, exc)
            predicted = None
        if predicted != entry.label:
            errors[entry.label] += 1
    return report_from_counts(
        manifest.class_names,
        [tests[label] for label in manifest.class_names],
        [errors[label] for label in manifest.class_names],
    )


def _field_error(path: str, message: str) -> ValueError:
    return ValueError(f"bundle schema error at {path}: {message}")


def _require(d: dict, key: str, kind, path: str):
    if not isinstance(d, dict):
        raise _field_error(path, "expected an object")
    if key not in d:
        raise _field_error(f"{path}.{key}", "missing field")
    value = d[key]
    if kind is not None and not isinstance(value, kind):
        raise _field_error(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def bundle_to_dict(bundle: ModelBundle) -> dict:
    return {
        "pca": bundle.pca.to_dict(),
        "pnn": bundle.pnn.to_dict(),
        "pc_minmax": bundle.pc_minmax.tolist(),
        "feature_config": bundle.feature_config.to_dict(),
        "class_names": list(bundle.class_names),
    }


def bundle_from_dict(data: dict) -> ModelBundle:
    if not isinstance(data, dict):
        raise _field_error("$", "expected a JSON object")
    pca_dict = _require(data, "pca", dict, "$")
    pnn_dict = _require(data, "pnn", dict, "$")
    minmax = _require(data, "pc_minmax", list, "$")
    config_dict = _require(data, "feature_config", dict, "$")
    class_names = _require(data, "class_names", list, "$")
    for key in ("mean", "scale", "loadings", "explained", "m"):
        _require(pca_dict, key, None, "$.pca")
    for key in ("spread", "weights", "class_matrix", "class_names", "input_dim"):
        _require(pnn_dict, key, None, "$.pnn")
    for key in ("level", "tau", "smooth_kernel", "smooth_factor_kernels"):
        _require(config_dict, key, None, "$.feature_config")
    try:
        pca_model = pca.PcaModel.from_dict(pca_dict)
    except (TypeError, ValueError) as exc:
        raise _field_error("$.pca", str(exc)) from exc
    try:
        pnn_model = pnn.PnnModel.from_dict(pnn_dict)
    except (TypeError, ValueError) as exc:
        raise _field_error("$.pnn", str(exc)) from exc
    pc_minmax = np.asarray(minmax, dtype=np.float64)
    if pc_minmax.ndim != 2 or pc_minmax.shape[1] != 2:
        raise _field_error("$.pc_minmax", f"expected an (m, 2) array, got shape {pc_minmax.shape}")
    return ModelBundle(
        pca=pca_model,
        pnn=pnn_model,
        pc_minmax=pc_minmax,
        feature_config=FeatureConfig.from_dict(config_dict),
        class_names=tuple(str(c) for c in class_names),
    )


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bundle_to_dict(bundle), indent=2) + "\n", encoding="utf-8")


def load_bundle(path: str | Path) -> ModelBundle:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"bundle file {path} is not valid JSON: {exc}") from exc
    return bundle_from_dict(data)
