"""Assembled models: stream encoders + fusion + classifier head(s)."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np
from scipy.special import expit

from .. import numkit as nk
from ..corpus.lexicon import EmotionLexicon
from ..corpus.model import MODALITIES, Label, TrailerInstance
from ..corpus.vocab import Vocabulary
from ..dsp import DspConfig
from ..errors import ConfigError, DataError
from ..numkit import DenseParams, Rng, Tensor
from ..streams import (
    AudioStreamParams,
    StreamVector,
    TextStreamParams,
    VideoStreamParams,
    encode_audio,
    encode_text,
    encode_video,
)
from .gmu import (
    BimodalGmuParams,
    GmuParams,
    concat_fuse,
    gmu_bimodal,
    gmu_trimodal,
    head_logits,
    mean_logits,
    predict_label,
)

STRATEGIES = ("single", "gmu", "concat", "late")


@dataclass(frozen=True)
class ModelConfig:
    d_e: int = 32
    d_h: int = 64
    d_s: int = 64
    d_f: int = 64
    n_chunks: int = 10
    n_frames: int = 18
    max_text_len: int = 512
    video_proj: int | None = None
    embedding_provider: str = "table"
    dsp: DspConfig = field(default_factory=DspConfig)

    def validate(self) -> "ModelConfig":
        for name in ("d_e", "d_h", "d_s", "d_f", "n_chunks", "n_frames", "max_text_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.video_proj is not None and self.video_proj < 1:
            raise ConfigError("video_proj must be >= 1 when set")
        if self.embedding_provider not in ("table", "precomputed"):
            raise ConfigError(f"unknown embedding provider {self.embedding_provider!r}")
        self.dsp.validate()
        return self

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "dsp"}
        out["dsp"] = {f.name: getattr(self.dsp, f.name) for f in fields(self.dsp)}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        dsp = DspConfig(**d.pop("dsp", {}))
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model option(s): {sorted(unknown)}")
        return cls(dsp=dsp, **d)


@dataclass(frozen=True)
class FusionSpec:
    strategy: str
    modalities: tuple[str, ...]

    def __post_init__(self):
        mods = tuple(m for m in MODALITIES if m in self.modalities)
        if len(mods) != len(self.modalities) or not mods:
            raise ConfigError(f"bad modality subset {self.modalities!r}")
        strategy = self.strategy.lower()
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown fusion strategy {self.strategy!r}")
        if len(mods) == 1:
            if strategy == "gmu":
                raise ConfigError("a GMU needs at least two modalities")
            strategy = "single"
        elif strategy == "single":
            raise ConfigError("single-modality spec given several modalities")
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "modalities", mods)

    @classmethod
    def parse(cls, name: str) -> "FusionSpec":
        """``"gmu:text+audio+video"``, ``"late:text+video"``, ``"single:audio"`` or just ``"audio"``."""
        strategy, _, mods = name.partition(":")
        if not mods:
            strategy, mods = "single", strategy
        return cls(strategy, tuple(m.strip() for m in mods.split("+")))

    @property
    def name(self) -> str:
        return f"{self.strategy}:{'+'.join(self.modalities)}"


@dataclass
class Prediction:
    logits: Tensor
    scores: np.ndarray
    label: Label
    gates: dict[str, np.ndarray] | None = None


@dataclass
class ModelBundle:
    config: ModelConfig
    spec: FusionSpec
    streams: dict[str, object]
    fusion: GmuParams | BimodalGmuParams | DenseParams | None
    heads: dict[str, DenseParams]  # "shared", or one per modality for late fusion
    train_config: dict = field(default_factory=dict)

    @property
    def vocab(self) -> Vocabulary | None:
        text = self.streams.get("text")
        return text.vocab if text is not None else None

    def parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for m, p in self.streams.items():
            out.update({f"{m}.{k}": t for k, t in p.tensors().items()})
        if self.fusion is not None:
            out.update({f"fusion.{k}": t for k, t in self.fusion.tensors().items()})
        for h, p in self.heads.items():
            out.update({f"head.{h}.{k}": t for k, t in p.tensors().items()})
        return out

    def buffers(self) -> dict[str, np.ndarray]:
        """Fixed, non-trained arrays (feature normalization)."""
        out: dict[str, np.ndarray] = {}
        for m, p in self.streams.items():
            if hasattr(p, "buffers"):
                out.update({f"{m}.{k}": v for k, v in p.buffers().items()})
        return out


def init_stream(
    modality: str,
    rng: Rng,
    cfg: ModelConfig,
    vocab: Vocabulary | None = None,
    lexicon: EmotionLexicon | None = None,
    d_v: int | None = None,
):
    if modality == "text":
        if vocab is None or lexicon is None:
            raise ConfigError("text stream needs a vocabulary and a lexicon")
        return TextStreamParams.init(
            rng, vocab, lexicon, cfg.d_e, cfg.d_h, cfg.d_s, cfg.max_text_len, cfg.embedding_provider
        )
    if modality == "audio":
        return AudioStreamParams.init(rng, cfg.n_chunks, cfg.d_h, cfg.d_s, cfg.dsp)
    if modality == "video":
        if d_v is None:
            raise ConfigError("video stream needs the frame feature width")
        return VideoStreamParams.init(rng, d_v, cfg.n_frames, cfg.d_h, cfg.d_s, cfg.video_proj)
    raise ConfigError(f"unknown modality {modality!r}")


def init_bundle(
    spec: FusionSpec,
    cfg: ModelConfig,
    rng: Rng,
    vocab: Vocabulary | None = None,
    lexicon: EmotionLexicon | None = None,
    d_v: int | None = None,
) -> ModelBundle:
    cfg.validate()
    streams = {m: init_stream(m, rng.fork("stream", m), cfg, vocab, lexicon, d_v) for m in spec.modalities}
    k = len(spec.modalities)
    fusion = None
    if spec.strategy == "gmu":
        fusion = (GmuParams if k == 3 else BimodalGmuParams).init(rng.fork("fusion"), cfg.d_s, cfg.d_f)
    elif spec.strategy == "concat":
        fusion = DenseParams.init(rng.fork("fusion"), k * cfg.d_s, cfg.d_f, "concat")
    if spec.strategy == "late":
        heads = {m: DenseParams.init(rng.fork("head", m), cfg.d_s, 2, f"head.{m}") for m in spec.modalities}
    else:
        width = cfg.d_s if spec.strategy == "single" else cfg.d_f
        heads = {"shared": DenseParams.init(rng.fork("head"), width, 2, "head")}
    return ModelBundle(cfg, spec, streams, fusion, heads)


def encode(inst: TrailerInstance, modality: str, bundle: ModelBundle) -> StreamVector:
    p = bundle.streams[modality]
    if modality == "text":
        return encode_text(inst, p)
    if modality == "audio":
        return encode_audio(inst, p)
    return encode_video(inst, p)


def missing_modalities(inst: TrailerInstance, spec: FusionSpec) -> list[str]:
    return [m for m in spec.modalities if not inst.has(m)]


def forward_logits(inst: TrailerInstance, bundle: ModelBundle) -> tuple[Tensor, dict[str, Tensor] | None]:
    """Differentiable logits for one instance, plus gate tensors for GMU models."""
    spec = bundle.spec
    missing = missing_modalities(inst, spec)
    if missing:
        raise DataError(f"{inst.id}: model needs missing modality {', '.join(missing)}")
    xs = [encode(inst, m, bundle) for m in spec.modalities]
    if spec.strategy == "single":
        return head_logits(xs[0], bundle.heads["shared"]), None
    if spec.strategy == "late":
        per = [head_logits(x, bundle.heads[x.modality]) for x in xs]
        return Tensor(mean_logits(per)), {f"logits.{x.modality}": lg for x, lg in zip(xs, per)}
    if spec.strategy == "concat":
        return head_logits(concat_fuse(xs, bundle.fusion), bundle.heads["shared"]), None
    if len(xs) == 3:
        h, gates = gmu_trimodal(*xs, bundle.fusion)
    else:
        h, gates = gmu_bimodal(*xs, bundle.fusion)
    names = spec.modalities
    return head_logits(h, bundle.heads["shared"]), {f"z.{m}": z for m, z in zip(names, gates)}


def forward(inst: TrailerInstance, bundle: ModelBundle) -> Prediction:
    with nk.no_grad():
        logits, extra = forward_logits(inst, bundle)
    scores = expit(logits.data)
    gates = None
    if extra is not None and bundle.spec.strategy == "gmu":
        gates = {k[2:]: v.data for k, v in extra.items()}
    return Prediction(logits, scores, predict_label(scores), gates)


def predict_all(instances: Sequence[TrailerInstance], bundle: ModelBundle) -> list[Prediction]:
    return [forward(i, bundle) for i in instances]


def member_bundle(bundle: ModelBundle, modality: str) -> ModelBundle:
    """The single-modality model inside a late-fusion bundle (shares tensors)."""
    if bundle.spec.strategy != "late":
        raise ValueError("only late-fusion bundles have per-modality members")
    return ModelBundle(
        bundle.config,
        FusionSpec("single", (modality,)),
        {modality: bundle.streams[modality]},
        None,
        {"shared": bundle.heads[modality]},
        bundle.train_config,
    )


def assemble_late(members: Sequence[ModelBundle]) -> ModelBundle:
    """Combine independently trained single-modality models into a late-fusion model."""
    if len(members) < 2:
        raise ConfigError("late fusion needs at least two member models")
    mods = []
    for m in members:
        if m.spec.strategy != "single":
            raise ConfigError("late fusion members must be single-modality models")
        mods.append(m.spec.modalities[0])
    spec = FusionSpec("late", tuple(mods))
    by_mod = {m.spec.modalities[0]: m for m in members}
    streams = {m: by_mod[m].streams[m] for m in spec.modalities}
    heads = {m: by_mod[m].heads["shared"] for m in spec.modalities}
    cfg = members[0].config
    return ModelBundle(cfg, spec, streams, None, heads, dict(members[0].train_config))
