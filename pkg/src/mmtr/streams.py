"""Modality encoders: each maps one trailer to a fixed-width stream vector in (-1, 1)."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numkit as nk
from .corpus.binfmt import FRAMES_MAGIC, read_matrix
from .corpus.lexicon import CATEGORIES, EmotionLexicon, emotion_vector
from .corpus.model import TrailerInstance
from .corpus.vocab import Vocabulary
from .dsp import DspConfig, chunk_mfcc, mfcc
from .errors import DataError
from .numkit import AttentionParams, DenseParams, LstmParams, Rng, Tensor

N_EMOTIONS = len(CATEGORIES)


@dataclass
class StreamVector:
    values: Tensor
    modality: str

    @property
    def dim(self) -> int:
        return self.values.shape[0]


# text


@dataclass
class TextStreamParams:
    table: Tensor | None  # None when embeddings come precomputed per instance
    lstm: LstmParams
    attn: AttentionParams
    dense: DenseParams  # (d_h + 10) -> d_s
    vocab: Vocabulary
    lexicon: EmotionLexicon
    max_len: int = 512
    provider: str = "table"

    @classmethod
    def init(
        cls,
        rng: Rng,
        vocab: Vocabulary,
        lexicon: EmotionLexicon,
        d_e: int,
        d_h: int,
        d_s: int,
        max_len: int = 512,
        provider: str = "table",
    ) -> "TextStreamParams":
        table = None
        if provider == "table":
            table = nk.parameter(rng.normal((vocab.table_rows, d_e), scale=0.1), "text.table")
        elif provider != "precomputed":
            raise ValueError(f"unknown embedding provider {provider!r}")
        return cls(
            table,
            LstmParams.init(rng, d_e, d_h, "text.lstm"),
            AttentionParams.init(rng, d_h, "text.attn"),
            DenseParams.init(rng, d_h + N_EMOTIONS, d_s, "text.dense"),
            vocab,
            lexicon,
            max_len,
            provider,
        )

    def tensors(self) -> dict[str, Tensor]:
        out = {} if self.table is None else {"table": self.table}
        out.update({f"lstm.{k}": v for k, v in self.lstm.tensors().items()})
        out.update({f"attn.{k}": v for k, v in self.attn.tensors().items()})
        out.update({f"dense.{k}": v for k, v in self.dense.tensors().items()})
        return out


def embed_tokens(tokens, table: Tensor, vocab: Vocabulary) -> Tensor:
    return nk.take_rows(table, vocab.encode(list(tokens)))


@functools.lru_cache(maxsize=4096)
def _precomputed_embeddings(path: str) -> np.ndarray:
    return read_matrix(path, FRAMES_MAGIC)


def _text_inputs(inst: TrailerInstance, p: TextStreamParams) -> Tensor:
    tokens = inst.tokens[: p.max_len]
    if p.provider == "table":
        return embed_tokens(tokens, p.table, p.vocab)
    path = inst.meta.get("embeddings")
    if not path:
        raise DataError(f"{inst.id}: precomputed-embedding provider needs meta['embeddings']")
    mat = _precomputed_embeddings(str(Path(path)))[: p.max_len]
    if mat.shape[1] != p.lstm.d_in:
        raise DataError(f"{inst.id}: embeddings have width {mat.shape[1]}, expected {p.lstm.d_in}")
    return Tensor(mat)


@functools.lru_cache(maxsize=16384)
def _emotions(inst: TrailerInstance, lexicon: EmotionLexicon, max_len: int) -> np.ndarray:
    return emotion_vector(inst.tokens[:max_len], lexicon)


def encode_text(inst: TrailerInstance, p: TextStreamParams) -> StreamVector:
    """embed -> LSTM -> attention -> [context, emotion vector] -> dense -> tanh.

    Tokens beyond ``p.max_len`` are ignored, for the emotion vector too.
    """
    hidden = nk.lstm_sequence(_text_inputs(inst, p), p.lstm)
    context, _ = nk.attention(hidden, p.attn)
    joint = nk.concat([context, Tensor(_emotions(inst, p.lexicon, p.max_len))])
    return StreamVector(nk.tanh(nk.dense(joint, p.dense)), "text")


# audio


@dataclass
class AudioStreamParams:
    n_chunks: int
    lstm: LstmParams
    attn: AttentionParams
    dense: DenseParams
    dsp: DspConfig = field(default_factory=DspConfig)
    # fixed per-coefficient standardization, fitted on training data (not trained)
    shift: np.ndarray | None = None
    scale: np.ndarray | None = None

    @classmethod
    def init(cls, rng: Rng, n_chunks: int, d_h: int, d_s: int, dsp: DspConfig | None = None) -> "AudioStreamParams":
        dsp = dsp or DspConfig()
        if n_chunks < 1:
            raise ValueError("n_chunks must be positive")
        return cls(
            n_chunks,
            LstmParams.init(rng, dsp.n_coeffs, d_h, "audio.lstm"),
            AttentionParams.init(rng, d_h, "audio.attn"),
            DenseParams.init(rng, d_h, d_s, "audio.dense"),
            dsp,
        )

    def tensors(self) -> dict[str, Tensor]:
        out = {f"lstm.{k}": v for k, v in self.lstm.tensors().items()}
        out.update({f"attn.{k}": v for k, v in self.attn.tensors().items()})
        out.update({f"dense.{k}": v for k, v in self.dense.tensors().items()})
        return out

    def buffers(self) -> dict[str, np.ndarray]:
        if self.shift is None:
            return {}
        return {"shift": self.shift, "scale": self.scale}


def audio_features(inst: TrailerInstance, dsp: DspConfig) -> np.ndarray:
    """The instance's MFCC matrix, from cache or computed from its signal."""
    if inst.mfcc is not None:
        return inst.mfcc
    if inst.audio is None:
        raise DataError(f"{inst.id}: no audio")
    return mfcc(inst.audio, dsp.for_rate(inst.audio.sample_rate))


@functools.lru_cache(maxsize=16384)
def _chunked(inst: TrailerInstance, n_chunks: int, dsp: DspConfig) -> np.ndarray:
    return chunk_mfcc(audio_features(inst, dsp), n_chunks)


def audio_chunks(inst: TrailerInstance, n_chunks: int, dsp: DspConfig) -> np.ndarray:
    return _chunked(inst, n_chunks, dsp)


def fit_audio_normalization(instances, p: AudioStreamParams) -> None:
    """Set ``p.shift``/``p.scale`` to the per-coefficient mean and std of chunk vectors."""
    rows = np.concatenate([audio_chunks(i, p.n_chunks, p.dsp) for i in instances])
    p.shift = rows.mean(axis=0)
    p.scale = np.maximum(rows.std(axis=0), 1e-6)


def encode_audio_chunks(chunks, p: AudioStreamParams) -> StreamVector:
    hidden = nk.lstm_sequence(chunks, p.lstm)
    context, _ = nk.attention(hidden, p.attn)
    return StreamVector(nk.tanh(nk.dense(context, p.dense)), "audio")


def encode_audio(inst: TrailerInstance, p: AudioStreamParams, dsp: DspConfig | None = None) -> StreamVector:
    """MFCC -> n-chunk averages -> LSTM -> attention -> dense -> tanh."""
    chunks = audio_chunks(inst, p.n_chunks, dsp or p.dsp)
    if chunks.shape[1] != p.lstm.d_in:
        raise DataError(f"{inst.id}: MFCC width {chunks.shape[1]} does not match model ({p.lstm.d_in})")
    if p.shift is not None:
        chunks = (chunks - p.shift) / p.scale
    return encode_audio_chunks(Tensor(chunks), p)


# video


@dataclass
class VideoStreamParams:
    n_frames: int
    projection: DenseParams | None
    lstm: LstmParams
    dense: DenseParams

    @classmethod
    def init(
        cls, rng: Rng, d_v: int, n_frames: int, d_h: int, d_s: int, d_proj: int | None = None
    ) -> "VideoStreamParams":
        if n_frames < 1:
            raise ValueError("n_frames must be positive")
        proj = DenseParams.init(rng, d_v, d_proj, "video.proj") if d_proj else None
        return cls(
            n_frames,
            proj,
            LstmParams.init(rng, d_proj or d_v, d_h, "video.lstm"),
            DenseParams.init(rng, d_h, d_s, "video.dense"),
        )

    @property
    def d_v(self) -> int:
        return self.projection.d_in if self.projection else self.lstm.d_in

    def tensors(self) -> dict[str, Tensor]:
        out = {}
        if self.projection is not None:
            out.update({f"proj.{k}": v for k, v in self.projection.tensors().items()})
        out.update({f"lstm.{k}": v for k, v in self.lstm.tensors().items()})
        out.update({f"dense.{k}": v for k, v in self.dense.tensors().items()})
        return out


def subsample_indices(n_frames: int, target: int) -> np.ndarray:
    if n_frames < 1:
        raise DataError("cannot subsample an empty frame sequence")
    if target == 1:
        return np.zeros(1, dtype=np.int64)
    # nearest evenly spaced position, halves rounded up; exact integer arithmetic
    i = np.arange(target, dtype=np.int64)
    return (2 * i * (n_frames - 1) + (target - 1)) // (2 * (target - 1))


def subsample_frames(frames: np.ndarray, target: int) -> np.ndarray:
    frames = np.asarray(frames)
    return frames[subsample_indices(frames.shape[0], target)]


def encode_video(inst: TrailerInstance, p: VideoStreamParams) -> StreamVector:
    """Evenly subsample frames -> optional projection -> LSTM -> last hidden -> dense -> tanh."""
    if inst.frames is None:
        raise DataError(f"{inst.id}: no video frames")
    if inst.frames.shape[1] != p.d_v:
        raise DataError(f"{inst.id}: frame width {inst.frames.shape[1]} does not match model ({p.d_v})")
    x = Tensor(subsample_frames(inst.frames, p.n_frames))
    if p.projection is not None:
        x = nk.dense(x, p.projection)
    hidden = nk.lstm_sequence(x, p.lstm)
    last = nk.index(hidden, -1)
    return StreamVector(nk.tanh(nk.dense(last, p.dense)), "video")


ENCODERS = {"text": encode_text, "audio": encode_audio, "video": encode_video}
