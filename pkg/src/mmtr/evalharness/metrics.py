"""Per-class and averaged precision/recall/F1, reported on a 0-100 scale."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..corpus.model import Label

CLASS_NAMES = tuple(str(lab) for lab in Label)


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    per_class: dict[str, ClassMetrics]
    macro: ClassMetrics
    weighted: ClassMetrics
    accuracy: float
    confusion: list[list[int]]  # confusion[gold][pred]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            {k: ClassMetrics(**v) for k, v in d["per_class"].items()},
            ClassMetrics(**d["macro"]),
            ClassMetrics(**d["weighted"]),
            d["accuracy"],
            d["confusion"],
        )


def f1_from(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)


def compute_metrics(predictions: Sequence[int], golds: Sequence[int], n_classes: int = 2) -> MetricsReport:
    """Standard definitions; a class never predicted scores precision 0.

    Macro averages run over classes that occur in the golds or the
    predictions; a class absent from both reports zeros with support 0 and
    stays out of every average.
    """
    pred = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(golds, dtype=np.int64)
    if pred.shape != gold.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {gold.size} golds")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction list")
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(conf, (gold, pred), 1)
    per_class = {}
    present = []
    for c in range(n_classes):
        tp = conf[c, c]
        support = int(conf[c].sum())
        predicted = int(conf[:, c].sum())
        p = tp / predicted if predicted else 0.0
        r = tp / support if support else 0.0
        name = CLASS_NAMES[c] if c < len(CLASS_NAMES) else str(c)
        per_class[name] = ClassMetrics(float(100.0 * p), float(100.0 * r), float(100.0 * f1_from(p, r)), support)
        if support or predicted:
            present.append(name)
    rows = [per_class[k] for k in present]
    macro = ClassMetrics(
        float(np.mean([m.precision for m in rows])),
        float(np.mean([m.recall for m in rows])),
        float(np.mean([m.f1 for m in rows])),
        int(gold.size),
    )
    vals = list(per_class.values())
    sup = [m.support for m in vals]
    weighted = ClassMetrics(
        support_weighted([m.precision for m in vals], sup),
        support_weighted([m.recall for m in vals], sup),
        support_weighted([m.f1 for m in vals], sup),
        int(gold.size),
    )
    return MetricsReport(per_class, macro, weighted, 100.0 * float(np.mean(pred == gold)), conf.tolist())


def weighted_f1(predictions: Sequence[int], golds: Sequence[int]) -> float:
    return compute_metrics(predictions, golds).weighted.f1


def support_weighted(values: Sequence[float], supports: Sequence[int]) -> float:
    # sum of support * value over total support; fsum keeps all-equal inputs exact
    total = math.fsum(supports)
    return math.fsum(float(s) * float(v) for s, v in zip(supports, values)) / total


def most_frequent_weighted_f1(p_majority: float) -> float:
    """Closed form for always predicting the majority class: p * 2p / (1 + p), on 0-100."""
    return 100.0 * p_majority * (2.0 * p_majority / (1.0 + p_majority))
