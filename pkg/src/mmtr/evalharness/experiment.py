"""Cross-validated experiment grid: baselines, single streams, and every fusion variant."""

from __future__ import annotations

import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus.lexicon import EmotionLexicon
from ..corpus.model import MODALITIES, Corpus, TrailerInstance
from ..errors import ConfigError, DataError, MmtrError
from ..fusion.model import FusionSpec, ModelBundle, ModelConfig, predict_all
from ..fusion.train import TrainConfig, member_seed, train
from ..numkit import derive_seed
from ..streams import audio_features
from .baselines import LinearSvm, TfidfVectorizer, majority_class
from .folds import FoldPlan, stratified_kfold
from .metrics import MetricsReport, compute_metrics
from .stats import TTestResult, paired_ttest

log = logging.getLogger(__name__)

BASELINES = ("most_frequent", "tfidf")
BEST_SINGLE = "best_single"


def default_variants() -> list[str]:
    """The full grid: baselines, singles, every pair and the triple under each fusion."""
    out = list(BASELINES) + [f"single:{m}" for m in MODALITIES]
    for strategy in ("late", "concat", "gmu"):
        out += [f"{strategy}:{a}+{b}" for a, b in itertools.combinations(MODALITIES, 2)]
    out += [f"{s}:text+audio+video" for s in ("late", "concat", "gmu")]
    return out


DEFAULT_TTEST_PAIRS = (
    (BEST_SINGLE, "gmu:text+audio+video"),
    ("gmu:text+audio+video", "concat:text+audio+video"),
    ("gmu:text+audio+video", "late:text+audio+video"),
)


def canonical_variant(name: str) -> str:
    if name in BASELINES:
        return name
    return FusionSpec.parse(name).name


@dataclass
class ExperimentConfig:
    variants: list[str] = field(default_factory=default_variants)
    ttest_pairs: list[tuple[str, str]] = field(default_factory=lambda: [tuple(p) for p in DEFAULT_TTEST_PAIRS])
    k: int = 5
    val_fraction: float = 0.10
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    tfidf_epochs: int = 20
    tfidf_reg: float = 1e-4

    def validate(self) -> "ExperimentConfig":
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if not self.variants:
            raise ConfigError("no variants requested")
        self.variants = [canonical_variant(v) for v in self.variants]
        pairs = []
        for a, b in self.ttest_pairs:
            pairs.append(tuple(x if x == BEST_SINGLE else canonical_variant(x) for x in (a, b)))
        self.ttest_pairs = pairs
        self.model.validate()
        self.train.validate()
        return self

    def to_dict(self) -> dict:
        return {
            "variants": list(self.variants),
            "ttest_pairs": [list(p) for p in self.ttest_pairs],
            "k": self.k,
            "val_fraction": self.val_fraction,
            "seed": self.seed,
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "tfidf_epochs": self.tfidf_epochs,
            "tfidf_reg": self.tfidf_reg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {"variants", "ttest_pairs", "k", "val_fraction", "seed", "model", "train", "tfidf_epochs", "tfidf_reg"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown experiment option(s): {sorted(unknown)}")
        if "model" in d:
            d["model"] = ModelConfig.from_dict(d["model"])
        if "train" in d:
            d["train"] = TrainConfig.from_dict(d["train"])
        if "ttest_pairs" in d:
            d["ttest_pairs"] = [tuple(p) for p in d["ttest_pairs"]]
        return cls(**d)


@dataclass
class FoldResult:
    val: MetricsReport
    test: MetricsReport
    epochs: int = 0

    def to_dict(self) -> dict:
        return {"val": self.val.to_dict(), "test": self.test.to_dict(), "epochs": self.epochs}

    @classmethod
    def from_dict(cls, d: dict) -> "FoldResult":
        return cls(MetricsReport.from_dict(d["val"]), MetricsReport.from_dict(d["test"]), d.get("epochs", 0))


@dataclass
class VariantResult:
    name: str
    folds: list[FoldResult] = field(default_factory=list)
    error: str | None = None
    external: bool = False  # row supplied from outside the harness

    @property
    def val_wf1(self) -> list[float]:
        return [f.val.weighted.f1 for f in self.folds]

    @property
    def test_wf1(self) -> list[float]:
        return [f.test.weighted.f1 for f in self.folds]

    @property
    def mean_val_wf1(self) -> float:
        return math.fsum(self.val_wf1) / len(self.folds) if self.folds else math.nan

    @property
    def mean_test_wf1(self) -> float:
        return math.fsum(self.test_wf1) / len(self.folds) if self.folds else math.nan

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "mean_val_wf1": None if math.isnan(self.mean_val_wf1) else self.mean_val_wf1,
            "mean_test_wf1": None if math.isnan(self.mean_test_wf1) else self.mean_test_wf1,
            "folds": [f.to_dict() for f in self.folds],
            "error": self.error,
        }
        if self.external:
            d["external"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VariantResult":
        return cls(d["name"], [FoldResult.from_dict(f) for f in d["folds"]], d.get("error"), d.get("external", False))


@dataclass
class TTestEntry:
    a: str
    b: str
    result: TTestResult | None
    note: str | None = None

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "result": self.result.to_dict() if self.result else None, "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "TTestEntry":
        return cls(d["a"], d["b"], TTestResult.from_dict(d["result"]) if d["result"] else None, d.get("note"))


@dataclass
class ExperimentReport:
    config: dict
    variants: dict[str, VariantResult]
    ttests: list[TTestEntry] = field(default_factory=list)
    corpus_summary: dict = field(default_factory=dict)

    FORMAT = "mmtr-experiment-report"
    VERSION = 1

    def to_dict(self) -> dict:
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "corpus": self.corpus_summary,
            "config": self.config,
            "variants": [v.to_dict() for v in self.variants.values()],
            "ttests": [t.to_dict() for t in self.ttests],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False, allow_nan=False) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        if not isinstance(d, dict) or d.get("format") != cls.FORMAT:
            raise DataError("not an experiment report document")
        variants = {v["name"]: VariantResult.from_dict(v) for v in d["variants"]}
        return cls(d["config"], variants, [TTestEntry.from_dict(t) for t in d["ttests"]], d.get("corpus", {}))

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: malformed experiment report ({exc})") from None

    def best_single(self) -> str | None:
        singles = [v for n, v in self.variants.items() if n.startswith("single:") and v.folds and not v.error]
        if not singles:
            return None
        return max(singles, key=lambda v: (v.mean_test_wf1, v.name)).name

    def mean_test(self, name: str) -> float:
        return self.variants[name].mean_test_wf1


def featurize_corpus(corpus: Corpus, cfg: ModelConfig) -> Corpus:
    """Replace raw audio by MFCC matrices so every fold reuses one extraction."""

    def fix(inst: TrailerInstance) -> TrailerInstance:
        if inst.audio is None:
            return inst
        return inst.with_mfcc(audio_features(inst, cfg.dsp))

    return corpus.map(fix)


def _labels(instances: Sequence[TrailerInstance]) -> list[int]:
    return [int(i.label) for i in instances]


def baseline_most_frequent(plan: FoldPlan, corpus: Corpus) -> VariantResult:
    """Predict the training portion's majority class everywhere."""
    res = VariantResult("most_frequent")
    for fold in plan.folds:
        train_labels = _labels(corpus.subset(fold.train + fold.val))
        guess = majority_class(train_labels)
        val, test = _labels(corpus.subset(fold.val)), _labels(corpus.subset(fold.test))
        res.folds.append(FoldResult(compute_metrics([guess] * len(val), val), compute_metrics([guess] * len(test), test)))
    return res


def baseline_tfidf_linear(
    plan: FoldPlan, corpus: Corpus, seed: int = 0, epochs: int = 20, reg: float = 1e-4
) -> VariantResult:
    """Unigram+bigram TF-IDF over subtitles with a hinge-loss linear classifier."""
    res = VariantResult("tfidf")
    for f, fold in enumerate(plan.folds):
        tr, va, te = corpus.subset(fold.train), corpus.subset(fold.val), corpus.subset(fold.test)
        vec = TfidfVectorizer()
        x_tr = vec.fit_transform([i.tokens for i in tr])
        svm = LinearSvm(reg=reg, epochs=epochs, seed=derive_seed(seed, "tfidf", f)).fit(x_tr, _labels(tr))
        pv = svm.predict(vec.transform([i.tokens for i in va]))
        pt = svm.predict(vec.transform([i.tokens for i in te]))
        res.folds.append(FoldResult(compute_metrics(pv, _labels(va)), compute_metrics(pt, _labels(te))))
    return res


def _score(bundle: ModelBundle, instances: Sequence[TrailerInstance]) -> MetricsReport:
    preds = [int(p.label) for p in predict_all(instances, bundle)]
    return compute_metrics(preds, _labels(instances))


def late_member_seed(master: int, fold: int) -> int:
    return derive_seed(master, "late-members", fold)


def run_experiment(
    corpus: Corpus,
    config: ExperimentConfig,
    lexicon: EmotionLexicon | None = None,
    external: Sequence[VariantResult] = (),
) -> ExperimentReport:
    """Run every requested variant over a stratified k-fold plan.

    Single-modality models double as late-fusion members: ``single:m`` in
    fold ``f`` is seeded exactly like the ``m`` member of any late variant
    in that fold, so one trained model serves both. A variant whose fold
    fails is recorded with its error and the rest of the grid continues.
    """
    config.validate()
    lexicon = lexicon or EmotionLexicon.bundled()
    plan = stratified_kfold(corpus, config.k, config.seed, config.val_fraction)
    needs_audio = any("audio" in v for v in config.variants)
    data = featurize_corpus(corpus, config.model) if needs_audio else corpus
    counts = corpus.class_counts
    report = ExperimentReport(
        config.to_dict(),
        {},
        corpus_summary={"n": len(corpus), **{str(k): v for k, v in counts.items()}},
    )
    members: dict[tuple[int, str], tuple[ModelBundle, int]] = {}

    def single(fold_idx: int, m: str, tr, va) -> tuple[ModelBundle, int]:
        key = (fold_idx, m)
        if key not in members:
            seed = member_seed(late_member_seed(config.seed, fold_idx), m)
            bundle, trace = train(tr, va, FusionSpec("single", (m,)), config.model, config.train, seed, lexicon)
            members[key] = (bundle, trace.best_epoch)
        return members[key]

    for name in config.variants:
        started = time.perf_counter()
        try:
            if name == "most_frequent":
                result = baseline_most_frequent(plan, data)
            elif name == "tfidf":
                result = baseline_tfidf_linear(plan, data, config.seed, config.tfidf_epochs, config.tfidf_reg)
            else:
                spec = FusionSpec.parse(name)
                result = VariantResult(name)
                for f, fold in enumerate(plan.folds):
                    tr, va, te = data.subset(fold.train), data.subset(fold.val), data.subset(fold.test)
                    if spec.strategy == "single":
                        bundle, epochs = single(f, spec.modalities[0], tr, va)
                    elif spec.strategy == "late":
                        got = {m: single(f, m, tr, va) for m in spec.modalities}
                        bundle, _ = train(
                            tr, va, spec, config.model, config.train, late_member_seed(config.seed, f), lexicon,
                            members={m: b for m, (b, _) in got.items()},
                        )
                        epochs = max(e for _, e in got.values())
                    else:
                        bundle, trace = train(
                            tr, va, spec, config.model, config.train, derive_seed(config.seed, name, f), lexicon
                        )
                        epochs = trace.best_epoch
                    result.folds.append(FoldResult(_score(bundle, va), _score(bundle, te), epochs))
        except MmtrError as exc:
            log.error("variant %s failed: %s", name, exc)
            result = VariantResult(name, error=str(exc))
        report.variants[name] = result
        log.info(
            "%-26s val %.2f test %.2f (%.1fs)",
            name,
            result.mean_val_wf1,
            result.mean_test_wf1,
            time.perf_counter() - started,
        )
    for ext in external:
        report.variants[ext.name] = VariantResult(ext.name, ext.folds, ext.error, external=True)

    report.ttests = run_ttests(report, config.ttest_pairs)
    return report


def run_ttests(report: ExperimentReport, pairs) -> list[TTestEntry]:
    """Paired t-tests on per-fold test weighted F1."""
    out = []
    best = report.best_single()
    for a, b in pairs:
        ra = best if a == BEST_SINGLE else a
        rb = best if b == BEST_SINGLE else b
        label_a = f"{a}={ra}" if a == BEST_SINGLE else a
        label_b = f"{b}={rb}" if b == BEST_SINGLE else b
        va, vb = report.variants.get(ra or ""), report.variants.get(rb or "")
        if va is None or vb is None or va.error or vb.error or not va.folds or not vb.folds:
            out.append(TTestEntry(label_a, label_b, None, "variant missing or failed"))
            continue
        out.append(TTestEntry(label_a, label_b, paired_ttest(va.test_wf1, vb.test_wf1)))
    return out
