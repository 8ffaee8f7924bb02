"""Obscene-sound clip detection and X-rated recording screening."""

from .audio_io import (
    AudioFormatError,
    DatasetManifest,
    ManifestEntry,
    PcmClip,
    add_awgn,
    load_audio,
    load_manifest,
    save_manifest,
    save_wav,
    split_into_clips,
)
from .evaluation import (
    ClipDecision,
    ConfusionCounts,
    EvaluationReport,
    HarmfulRateReport,
    evaluate_manifest,
    f1_from_precision_recall,
    harmful_rate,
    metrics,
)
from .features import ClipFeatureVector, FeatureConfig, clip_feature, load_features, save_features
from .svm import (
    GridSearchResult,
    ScalingParams,
    SvmModel,
    TrainConfig,
    cross_validate,
    grid_search,
    load_model,
    predict,
    predict_batch,
    save_model,
    smo_train,
    train_model,
)

__version__ = "0.1.0"

__all__ = [
    "AudioFormatError",
    "ClipDecision",
    "ClipFeatureVector",
    "ConfusionCounts",
    "DatasetManifest",
    "EvaluationReport",
    "FeatureConfig",
    "GridSearchResult",
    "HarmfulRateReport",
    "ManifestEntry",
    "PcmClip",
    "ScalingParams",
    "SvmModel",
    "TrainConfig",
    "add_awgn",
    "clip_feature",
    "cross_validate",
    "evaluate_manifest",
    "f1_from_precision_recall",
    "grid_search",
    "harmful_rate",
    "load_audio",
    "load_features",
    "load_manifest",
    "load_model",
    "metrics",
    "predict",
    "predict_batch",
    "save_features",
    "save_manifest",
    "save_model",
    "save_wav",
    "smo_train",
    "split_into_clips",
    "train_model",
]
