"""Non-neural baselines: constant majority class and TF-IDF n-grams with a linear SVM."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import DataError
from ..numkit import Rng, derive_seed


def majority_class(labels: Sequence[int]) -> int:
    """Most frequent label; ties go to 0 (Green)."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=2)
    return int(np.argmax(counts))


def ngrams(tokens: Sequence[str], n_max: int = 2) -> list[str]:
    out = list(tokens)
    for n in range(2, n_max + 1):
        out.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return out


class TfidfVectorizer:
    """Raw-count tf, smoothed idf = ln((1 + N) / (1 + df)) + 1, L2-normalized rows."""

    def __init__(self, n_max: int = 2):
        self.n_max = n_max
        self.vocabulary: dict[str, int] = {}
        self.idf: np.ndarray | None = None

    def fit(self, docs: Sequence[Sequence[str]]) -> "TfidfVectorizer":
        df: Counter[str] = Counter()
        for doc in docs:
            df.update(set(ngrams(doc, self.n_max)))
        if not df:
            raise DataError("TF-IDF vocabulary is empty")
        terms = sorted(df)
        self.vocabulary = {t: i for i, t in enumerate(terms)}
        n = len(docs)
        self.idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in terms])
        return self

    def transform(self, docs: Sequence[Sequence[str]]) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for r, doc in enumerate(docs):
            counts = Counter(self.vocabulary[g] for g in ngrams(doc, self.n_max) if g in self.vocabulary)
            if not counts:
                continue
            idx = np.fromiter(counts.keys(), dtype=np.int64)
            v = np.fromiter(counts.values(), dtype=np.float64) * self.idf[idx]
            v /= np.linalg.norm(v)
            rows.extend([r] * len(idx))
            cols.extend(idx.tolist())
            vals.extend(v.tolist())
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(docs), len(self.vocabulary)))

    def fit_transform(self, docs):
        return self.fit(docs).transform(docs)


@dataclass
class LinearSvm:
    """Hinge loss + L2 penalty, trained by seeded stochastic subgradient steps (Pegasos)."""

    reg: float = 1e-4
    epochs: int = 20
    seed: int = 0
    weights: np.ndarray | None = None
    bias: float = 0.0

    def fit(self, x: sp.csr_matrix, labels: Sequence[int]) -> "LinearSvm":
        x = sp.csr_matrix(x)
        y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
        n, d = x.shape
        w = np.zeros(d)
        b = 0.0
        rng = Rng(derive_seed(self.seed, "svm"))
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.reg * (t + 100))
                lo, hi = x.indptr[i], x.indptr[i + 1]
                cols, vals = x.indices[lo:hi], x.data[lo:hi]
                margin = y[i] * (vals @ w[cols] + b)
                w *= 1.0 - eta * self.reg
                if margin < 1.0:
                    w[cols] += eta * y[i] * vals
                    b += eta * y[i] * 0.1
        self.weights, self.bias = w, b
        return self

    def decision(self, x: sp.csr_matrix) -> np.ndarray:
        return x @ self.weights + self.bias

    def predict(self, x: sp.csr_matrix) -> np.ndarray:
        return (self.decision(x) > 0).astype(np.int64)
