from __future__ import annotations

import zlib
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from ..errors import DataError

OOV_BUCKETS = 1024


class Vocabulary:
    """Known words take indices ``0..n-1`` ordered by (frequency desc, word asc).

    Unseen words hash into ``OOV_BUCKETS`` reserved rows after the known
    words; the final row is the PAD row used for an empty subtitle.
    """

    def __init__(self, words: Sequence[str], n_buckets: int = OOV_BUCKETS):
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.n_buckets = n_buckets

    def __len__(self) -> int:
        return len(self.words)

    @property
    def pad_index(self) -> int:
        return len(self.words) + self.n_buckets

    @property
    def table_rows(self) -> int:
        return len(self.words) + self.n_buckets + 1

    def lookup(self, word: str) -> int:
        i = self.index.get(word)
        if i is not None:
            return i
        return len(self.words) + zlib.crc32(word.encode("utf-8")) % self.n_buckets

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            return np.array([self.pad_index], dtype=np.int64)
        return np.fromiter((self.lookup(t) for t in tokens), dtype=np.int64, count=len(tokens))


def build_vocab(token_lists: Iterable[Sequence[str]], min_freq: int = 1, n_buckets: int = OOV_BUCKETS) -> Vocabulary:
    token_lists = list(token_lists)
    if not token_lists:
        raise DataError("cannot build a vocabulary from an empty training set")
    counts = Counter(t for toks in token_lists for t in toks)
    words = sorted((w for w, c in counts.items() if c >= min_freq), key=lambda w: (-counts[w], w))
    return Vocabulary(words, n_buckets)
