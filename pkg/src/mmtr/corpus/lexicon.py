"""Word-to-emotion lexicon and the 10-dim normalized emotion vector."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from ..errors import DataError

CATEGORIES = (
    "anger",
    "anticipation",
    "joy",
    "trust",
    "disgust",
    "sadness",
    "surprise",
    "fear",
    "positive",
    "negative",
)
_INDEX = {c: i for i, c in enumerate(CATEGORIES)}


class EmotionLexicon:
    def __init__(self, mapping: Mapping[str, Iterable[str]]):
        table: dict[str, frozenset[int]] = {}
        for word, cats in mapping.items():
            idx = set()
            for c in cats:
                if c not in _INDEX:
                    raise DataError(f"unknown emotion category {c!r} for word {word!r}")
                idx.add(_INDEX[c])
            table[word.lower()] = frozenset(idx)
        self._table = table

    def __contains__(self, word: str) -> bool:
        return word in self._table

    def __len__(self) -> int:
        return len(self._table)

    def categories(self, word: str) -> list[str]:
        return [CATEGORIES[i] for i in sorted(self._table.get(word, ()))]

    def to_dict(self) -> dict[str, list[str]]:
        return {w: self.categories(w) for w in sorted(self._table)}

    @classmethod
    def from_lines(cls, lines: Iterable[str], source: str = "<lexicon>") -> "EmotionLexicon":
        mapping: dict[str, set[str]] = {}
        for n, line in enumerate(lines, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{source}:{n}: expected 'word<TAB>category'")
            word, cat = parts[0].strip(), parts[1].strip()
            if cat not in _INDEX:
                raise DataError(f"{source}:{n}: unknown category {cat!r}")
            mapping.setdefault(word, set()).add(cat)
        return cls(mapping)

    @classmethod
    def load(cls, path) -> "EmotionLexicon":
        p = Path(path)
        with p.open(encoding="utf-8") as fh:
            return cls.from_lines(fh, str(p))

    @classmethod
    def bundled(cls) -> "EmotionLexicon":
        text = resources.files("mmtr.corpus").joinpath("data/emotion_lexicon.tsv").read_text("utf-8")
        return cls.from_lines(text.splitlines(), "emotion_lexicon.tsv")


def emotion_vector(tokens: Iterable[str], lexicon: EmotionLexicon) -> np.ndarray:
    tokens = list(tokens)
    counts = np.zeros(len(CATEGORIES))
    for tok in tokens:
        for i in lexicon._table.get(tok, ()):
            counts[i] += 1.0
    return counts / max(1, len(tokens))
