"""Stratified k-fold plans and the stratified validation carve-out."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus.model import Corpus
from ..errors import ConfigError, DataError
from ..numkit import Rng, derive_seed


@dataclass
class Fold:
    train: list[str]
    val: list[str]
    test: list[str]


@dataclass
class FoldPlan:
    k: int
    assignment: dict[str, int]
    folds: list[Fold]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "assignment": self.assignment,
            "folds": [{"train": f.train, "val": f.val, "test": f.test} for f in self.folds],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FoldPlan":
        return cls(d["k"], dict(d["assignment"]), [Fold(f["train"], f["val"], f["test"]) for f in d["folds"]])


def _by_class(ids: Sequence[str], labels: Sequence[int]) -> dict[int, list[str]]:
    groups: dict[int, list[str]] = {}
    for i, y in zip(ids, labels):
        groups.setdefault(int(y), []).append(i)
    return dict(sorted(groups.items()))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def carve_validation(
    train_ids: Sequence[str], labels: Sequence[int], fraction: float = 0.10, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Stratified hold-out of ``round(fraction * n)`` ids.

    The total is split across classes by largest remainder so per-class
    sizes stay as close to proportional as integers allow.
    """
    n = len(train_ids)
    if not 0.0 < fraction < 1.0:
        raise ConfigError("validation fraction must lie in (0, 1)")
    groups = _by_class(train_ids, labels)
    if len(groups) < 2:
        raise DataError("validation carve-out needs both classes in the training portion")
    total = round_half_up(fraction * n)
    if total < 1 or total >= n:
        raise DataError(f"cannot carve {total} validation instances out of {n}")
    shares = {c: total * len(g) / n for c, g in groups.items()}
    sizes = {c: int(math.floor(s)) for c, s in shares.items()}
    leftover = total - sum(sizes.values())
    for c in sorted(groups, key=lambda c: (-(shares[c] - sizes[c]), c))[:leftover]:
        sizes[c] += 1
    rng = Rng(derive_seed(seed, "validation"))
    val: set[str] = set()
    for c, g in groups.items():
        picked = [g[i] for i in rng.permutation(len(g))[: sizes[c]]]
        val.update(picked)
    keep = [i for i in train_ids if i not in val]
    return keep, [i for i in train_ids if i in val]


def stratified_kfold(
    corpus: Corpus, k: int = 5, seed: int = 0, val_fraction: float = 0.10
) -> FoldPlan:
    """Per class: seeded shuffle, then deal instances round-robin to folds."""
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    ids, labels = corpus.ids, corpus.labels
    groups = _by_class(ids, labels)
    for c, g in groups.items():
        if len(g) < k:
            raise DataError(f"class {c} has {len(g)} instances, fewer than k={k}")
    rng = Rng(derive_seed(seed, "kfold"))
    assignment: dict[str, int] = {}
    for c, g in groups.items():
        for pos, j in enumerate(rng.permutation(len(g))):
            assignment[g[j]] = pos % k
    label_of = dict(zip(ids, labels))
    folds = []
    for f in range(k):
        test = [i for i in ids if assignment[i] == f]
        rest = [i for i in ids if assignment[i] != f]
        train, val = carve_validation(rest, [label_of[i] for i in rest], val_fraction, derive_seed(seed, "fold", f))
        folds.append(Fold(train, val, test))
    return FoldPlan(k, assignment, folds)
