"""Training loop: Adam on per-instance losses, validation-based model selection."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .. import numkit as nk
from ..corpus.lexicon import EmotionLexicon
from ..corpus.model import TrailerInstance
from ..corpus.vocab import build_vocab
from ..errors import ConfigError, DataError, NumericError
from ..evalharness.metrics import weighted_f1
from ..numkit import AdamState, Rng, derive_seed
from ..streams import fit_audio_normalization
from .model import (
    FusionSpec,
    ModelBundle,
    ModelConfig,
    assemble_late,
    forward,
    forward_logits,
    init_bundle,
)

log = logging.getLogger(__name__)

LOSSES = ("bce", "softmax")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    max_epochs: int = 100
    patience: int = 10
    batch_size: int = 8
    loss: str = "bce"
    class_weights: bool = False

    def validate(self) -> "TrainConfig":
        if not self.lr > 0:
            raise ConfigError("lr must be positive")
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ConfigError("max_epochs, patience and batch_size must be >= 1")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown training option(s): {sorted(unknown)}")
        return cls(**d)


@dataclass
class TrainLog:
    initial_loss: float = math.nan
    epoch_loss: list[float] = field(default_factory=list)
    val_wf1: list[float] = field(default_factory=list)
    best_epoch: int = 0
    best_val_wf1: float = -1.0
    stopped_early: bool = False
    members: dict[str, "TrainLog"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "members"}
        if self.members:
            d["members"] = {k: v.to_dict() for k, v in self.members.items()}
        return d


def instance_loss(inst: TrailerInstance, bundle: ModelBundle, cfg: TrainConfig, weights=None) -> nk.Tensor:
    logits, _ = forward_logits(inst, bundle)
    y = int(inst.label)
    w = 1.0 if weights is None else float(weights[y])
    if cfg.loss == "softmax":
        return nk.softmax_cross_entropy(logits, y, w)
    target = np.zeros(2)
    target[y] = 1.0
    return nk.bce_with_logits(logits, target, w)


def mean_loss(instances: Sequence[TrailerInstance], bundle: ModelBundle, cfg: TrainConfig, weights=None) -> float:
    with nk.no_grad():
        total = math.fsum(instance_loss(i, bundle, cfg, weights).item() for i in instances)
    return total / len(instances)


def evaluate_wf1(instances: Sequence[TrailerInstance], bundle: ModelBundle) -> float:
    preds = [int(forward(i, bundle).label) for i in instances]
    return weighted_f1(preds, [int(i.label) for i in instances])


def _class_weights(instances: Sequence[TrailerInstance]) -> np.ndarray:
    counts = np.bincount([int(i.label) for i in instances], minlength=2).astype(float)
    return len(instances) / (2.0 * counts)


def _check_train_set(train_set: Sequence[TrailerInstance], val_set: Sequence[TrailerInstance]) -> None:
    if not train_set or not val_set:
        raise DataError("training and validation sets must be non-empty")
    if len({i.label for i in train_set}) < 2:
        raise DataError("training set contains a single class")


def fit(
    bundle: ModelBundle,
    train_set: Sequence[TrailerInstance],
    val_set: Sequence[TrailerInstance],
    cfg: TrainConfig,
    seed: int,
) -> TrainLog:
    """Train ``bundle`` in place; on return it holds the best-validation parameters."""
    cfg.validate()
    _check_train_set(train_set, val_set)
    if bundle.spec.strategy == "late":
        raise ConfigError("late-fusion members are trained independently; use train()")
    params = list(bundle.parameters().values())
    weights = _class_weights(train_set) if cfg.class_weights else None
    rng = Rng(derive_seed(seed, "shuffle"))
    state = AdamState()
    trace = TrainLog(initial_loss=mean_loss(train_set, bundle, cfg, weights))
    if not math.isfinite(trace.initial_loss):
        raise NumericError("initial training loss is not finite")
    best = [p.data.copy() for p in params]
    stale = 0
    n = len(train_set)
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        running = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            nk.zero_grads(params)
            scale = 1.0 / len(batch)
            for j in batch:
                loss = instance_loss(train_set[j], bundle, cfg, weights)
                value = loss.item()
                if not math.isfinite(value):
                    raise NumericError(f"non-finite loss on {train_set[j].id} at epoch {epoch}")
                running += value
                nk.backward(loss, np.asarray(scale))
            for p in params:
                if p.grad is None:
                    p.grad = np.zeros_like(p.data)
                elif not np.all(np.isfinite(p.grad)):
                    raise NumericError(f"non-finite gradient for {p.name} at epoch {epoch}")
            nk.adam_step(params, state, cfg.lr)
        trace.epoch_loss.append(running / n)
        score = evaluate_wf1(val_set, bundle)
        trace.val_wf1.append(score)
        log.debug("%s epoch %d loss %.4f val wf1 %.2f", bundle.spec.name, epoch, running / n, score)
        if score > trace.best_val_wf1:
            trace.best_val_wf1, trace.best_epoch, stale = score, epoch, 0
            best = [p.data.copy() for p in params]
        else:
            stale += 1
            if stale >= cfg.patience:
                trace.stopped_early = True
                break
    for p, b in zip(params, best):
        p.data[...] = b
        p.grad = None
    return trace


def member_seed(seed: int, modality: str) -> int:
    return derive_seed(seed, "member", modality)


def train(
    train_set: Sequence[TrailerInstance],
    val_set: Sequence[TrailerInstance],
    spec: FusionSpec,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    seed: int,
    lexicon: EmotionLexicon | None = None,
    members: dict[str, ModelBundle] | None = None,
) -> tuple[ModelBundle, TrainLog]:
    """Build a fresh model for ``spec`` and train it.

    Late fusion trains one single-modality model per member (seeded with
    ``member_seed``) and averages them; ``members`` may supply already
    trained ones, which must have been produced with the same seeds.
    """
    _check_train_set(train_set, val_set)
    lexicon = lexicon or EmotionLexicon.bundled()
    if spec.strategy == "late":
        trace = TrainLog()
        trained = []
        for m in spec.modalities:
            if members and m in members:
                trained.append(members[m])
                continue
            b, t = train(train_set, val_set, FusionSpec("single", (m,)), model_cfg, train_cfg, member_seed(seed, m), lexicon)
            trained.append(b)
            trace.members[m] = t
        bundle = assemble_late(trained)
        bundle.train_config = {**train_cfg.to_dict(), "seed": seed}
        return bundle, trace

    vocab = build_vocab([i.tokens for i in train_set]) if "text" in spec.modalities else None
    d_v = None
    if "video" in spec.modalities:
        if train_set[0].frames is None:
            raise DataError(f"{train_set[0].id}: model needs missing modality video")
        d_v = train_set[0].frames.shape[1]
    bundle = init_bundle(spec, model_cfg, Rng(derive_seed(seed, "init")), vocab, lexicon, d_v)
    if "audio" in bundle.streams:
        fit_audio_normalization(train_set, bundle.streams["audio"])
    bundle.train_config = {**train_cfg.to_dict(), "seed": seed}
    trace = fit(bundle, train_set, val_set, train_cfg, seed)
    return bundle, trace
