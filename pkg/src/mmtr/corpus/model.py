"""Core data model: labels, trailer instances, corpora."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from ..dsp import Signal
from ..errors import DataError

MODALITIES = ("text", "audio", "video")


class Label(enum.IntEnum):
    GREEN = 0
    RED = 1

    @classmethod
    def parse(cls, s: str) -> "Label":
        try:
            return cls[str(s).strip().upper()]
        except KeyError:
            raise DataError(f"unknown label {s!r} (expected 'green' or 'red')") from None

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True, eq=False)
class TrailerInstance:
    id: str
    label: Label
    tokens: tuple[str, ...]
    frames: np.ndarray | None
    audio: Signal | None = None
    mfcc: np.ndarray | None = None
    meta: Mapping[str, str] = field(default_factory=dict)
    empty_text: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "label", Label(self.label))
        if not self.tokens and not self.empty_text:
            raise DataError(f"{self.id}: empty subtitle must be flagged with empty_text")
        if self.audio is not None and self.mfcc is not None:
            raise DataError(f"{self.id}: give either an audio signal or MFCC features, not both")
        if self.frames is not None:
            frames = np.asarray(self.frames, dtype=np.float64)
            if frames.ndim != 2 or frames.shape[0] < 1:
                raise DataError(f"{self.id}: frames must be a non-empty F x d matrix")
            object.__setattr__(self, "frames", frames)
        if self.mfcc is not None:
            object.__setattr__(self, "mfcc", np.asarray(self.mfcc, dtype=np.float64))

    def has(self, modality: str) -> bool:
        if modality == "text":
            return True
        if modality == "audio":
            return self.audio is not None or self.mfcc is not None
        if modality == "video":
            return self.frames is not None
        raise ValueError(f"unknown modality {modality!r}")

    def with_mfcc(self, mfcc: np.ndarray) -> "TrailerInstance":
        return TrailerInstance(
            self.id, self.label, self.tokens, self.frames, None, mfcc, self.meta, self.empty_text
        )


class Corpus:
    """Immutable, id-indexed collection of instances."""

    def __init__(self, instances: Iterable[TrailerInstance]):
        self.instances: tuple[TrailerInstance, ...] = tuple(instances)
        self._by_id: dict[str, TrailerInstance] = {}
        for inst in self.instances:
            if inst.id in self._by_id:
                raise DataError(f"duplicate instance id {inst.id!r}")
            self._by_id[inst.id] = inst

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[TrailerInstance]:
        return iter(self.instances)

    def __getitem__(self, key: str) -> TrailerInstance:
        return self._by_id[key]

    @property
    def ids(self) -> list[str]:
        return [i.id for i in self.instances]

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(i.label) for i in self.instances], dtype=np.int64)

    @property
    def class_counts(self) -> dict[Label, int]:
        c = Counter(i.label for i in self.instances)
        return {lab: c.get(lab, 0) for lab in Label}

    def subset(self, ids: Iterable[str]) -> list[TrailerInstance]:
        return [self._by_id[i] for i in ids]

    def map(self, fn) -> "Corpus":
        return Corpus(fn(i) for i in self.instances)
