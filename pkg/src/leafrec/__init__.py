"""Leaf recognition from silhouette morphology: 12 shape/vein features,
PCA reduction and a probabilistic neural network classifier."""

from .features import FEATURE_NAMES, ExtractionError, extract_features
from .geometry import PixelPoint, TerminalPair
from .pca import PcaModel, fit, project
from .pipeline import (
    EvaluationReport,
    FeatureConfig,
    Manifest,
    ModelBundle,
    classify_image,
    evaluate,
    load_bundle,
    load_manifest,
    report_from_counts,
    save_bundle,
    train_pipeline,
)
from .pnn import Activation, PnnModel, RankedClass, classify, radbas, train

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "ExtractionError",
    "extract_features",
    "PixelPoint",
    "TerminalPair",
    "PcaModel",
    "fit",
    "project",
    "EvaluationReport",
    "FeatureConfig",
    "Manifest",
    "ModelBundle",
    "classify_image",
    "evaluate",
    "load_bundle",
    "load_manifest",
    "report_from_counts",
    "save_bundle",
    "train_pipeline",
    "Activation",
    "PnnModel",
    "RankedClass",
    "classify",
    "radbas",
    "train",
    "__version__",
]
