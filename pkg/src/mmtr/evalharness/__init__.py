"""Evaluation protocol: folds, metrics, statistics, baselines and the experiment grid.

The experiment runner and report renderer live in ``mmtr.evalharness.experiment``
and ``mmtr.evalharness.report``; they import the model code, which itself uses
the metrics here, so they are not imported eagerly.
"""

from .baselines import LinearSvm, TfidfVectorizer, majority_class, ngrams
from .folds import Fold, FoldPlan, carve_validation, round_half_up, stratified_kfold
from .metrics import (
    CLASS_NAMES,
    ClassMetrics,
    MetricsReport,
    compute_metrics,
    f1_from,
    most_frequent_weighted_f1,
    support_weighted,
    weighted_f1,
)
from .stats import TTestResult, betainc_regularized, paired_ttest, t_two_sided_p

__all__ = [
    "CLASS_NAMES",
    "ClassMetrics",
    "Fold",
    "FoldPlan",
    "LinearSvm",
    "MetricsReport",
    "TTestResult",
    "TfidfVectorizer",
    "betainc_regularized",
    "carve_validation",
    "compute_metrics",
    "f1_from",
    "majority_class",
    "most_frequent_weighted_f1",
    "ngrams",
    "paired_ttest",
    "round_half_up",
    "stratified_kfold",
    "support_weighted",
    "t_two_sided_p",
    "weighted_f1",
]
