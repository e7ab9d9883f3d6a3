"""Fusion strategies, classifier heads, assembled models and training."""

from .gmu import (
    BimodalGmuParams,
    GmuParams,
    concat_fuse,
    gmu_bimodal,
    gmu_trimodal,
    head,
    head_logits,
    late_fuse,
    mean_logits,
    predict_label,
)
from .model import (
    FusionSpec,
    ModelBundle,
    ModelConfig,
    Prediction,
    assemble_late,
    forward,
    forward_logits,
    init_bundle,
    member_bundle,
    predict_all,
)
from .serialize import load_bundle, save_bundle
from .train import TrainConfig, TrainLog, fit, train

__all__ = [
    "BimodalGmuParams",
    "FusionSpec",
    "GmuParams",
    "ModelBundle",
    "ModelConfig",
    "Prediction",
    "TrainConfig",
    "TrainLog",
    "assemble_late",
    "concat_fuse",
    "fit",
    "forward",
    "forward_logits",
    "gmu_bimodal",
    "gmu_trimodal",
    "head",
    "head_logits",
    "init_bundle",
    "late_fuse",
    "load_bundle",
    "mean_logits",
    "member_bundle",
    "predict_all",
    "predict_label",
    "save_bundle",
    "train",
]
