import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from mmtr.corpus import Corpus, Label, TrailerInstance
from mmtr.errors import ConfigError, DataError
from mmtr.evalharness import (
    Fold,
    FoldPlan,
    LinearSvm,
    TfidfVectorizer,
    betainc_regularized,
    carve_validation,
    compute_metrics,
    f1_from,
    most_frequent_weighted_f1,
    paired_ttest,
    stratified_kfold,
    support_weighted,
    weighted_f1,
)
from mmtr.evalharness.experiment import (
    ExperimentConfig,
    ExperimentReport,
    baseline_most_frequent,
    baseline_tfidf_linear,
    default_variants,
    run_experiment,
)
from mmtr.evalharness.report import render_table, significant_variants
from mmtr.fusion import TrainConfig


def label_corpus(n_green, n_red, tokens=None):
    insts = []
    for i in range(n_green + n_red):
        lab = Label.GREEN if i < n_green else Label.RED
        toks = tokens(i, lab) if tokens else ["w"]
        insts.append(TrailerInstance(f"i{i:05d}", lab, toks, None))
    return Corpus(insts)


REFERENCE = label_corpus(1040, 403)


class TestFolds:
    def test_reference_fold_sizes(self):
        plan = stratified_kfold(REFERENCE, 5, seed=0)
        sizes = sorted(len(f.test) for f in plan.folds)
        reds = sorted(sum(REFERENCE[i].label is Label.RED for i in f.test) for f in plan.folds)
        assert sizes == [288, 288, 289, 289, 289]
        assert reds == [80, 80, 81, 81, 81]

    @given(st.integers(20, 80), st.integers(20, 80), st.integers(2, 5), st.integers(0, 99))
    def test_partition_and_balance(self, g, r, k, seed):
        c = label_corpus(g, r)
        plan = stratified_kfold(c, k, seed)
        tests = [i for f in plan.folds for i in f.test]
        assert sorted(tests) == sorted(c.ids)
        for f in plan.folds:
            assert not set(f.val) & set(f.train) and not set(f.test) & (set(f.train) | set(f.val))
            n_red = sum(c[i].label is Label.RED for i in f.test)
            assert abs(n_red - r / k) < 1

    def test_k_one(self):
        with pytest.raises(ConfigError):
            stratified_kfold(REFERENCE, 1)

    def test_class_smaller_than_k(self):
        with pytest.raises(DataError):
            stratified_kfold(label_corpus(10, 3), 5)

    def test_seed_determinism(self):
        assert stratified_kfold(REFERENCE, 5, 3).assignment == stratified_kfold(REFERENCE, 5, 3).assignment
        assert stratified_kfold(REFERENCE, 5, 3).assignment != stratified_kfold(REFERENCE, 5, 4).assignment

    def test_plan_round_trip(self):
        plan = stratified_kfold(label_corpus(20, 10), 3, 1)
        assert FoldPlan.from_dict(plan.to_dict()) == plan


class TestCarve:
    def test_hundred(self):
        ids = [f"x{i}" for i in range(100)]
        labels = [0] * 72 + [1] * 28
        keep, val = carve_validation(ids, labels, 0.10, seed=0)
        lab = dict(zip(ids, labels))
        assert len(val) == 10 and sum(lab[i] for i in val) == 3
        assert not set(keep) & set(val) and len(keep) == 90
        assert carve_validation(ids, labels, 0.10, seed=0) == (keep, val)

    def test_single_class(self):
        with pytest.raises(DataError):
            carve_validation(["a", "b", "c"], [0, 0, 0])

    def test_too_small(self):
        with pytest.raises(DataError):
            carve_validation(["a", "b"], [0, 1])


class TestMetrics:
    def test_perfect(self):
        m = compute_metrics([0, 1, 1, 0], [0, 1, 1, 0])
        assert m.weighted.f1 == m.macro.f1 == m.accuracy == 100.0
        assert all(c.precision == c.recall == c.f1 == 100.0 for c in m.per_class.values())

    def test_green_row(self):
        assert abs(100 * f1_from(0.874, 0.950) - 91.0) <= 0.05

    def test_table_averages(self):
        w = support_weighted([91.0, 72.8], [1040, 403])
        macro = (91.0 + 72.8) / 2
        assert abs(w - 85.9) < 0.05 and abs(macro - 81.9) < 0.05
        assert abs(w - 86.0) <= 0.5 and abs(macro - 82.0) <= 0.5

    def test_hand_example(self):
        # gold G G G R, pred G R G R: Green P=1 R=2/3, Red P=1/2 R=1
        m = compute_metrics([0, 1, 0, 1], [0, 0, 0, 1])
        assert math.isclose(m.per_class["green"].f1, 80.0)
        assert math.isclose(m.per_class["red"].f1, 200 / 3)
        assert math.isclose(m.weighted.f1, 0.75 * 80 + 0.25 * 200 / 3)
        assert m.confusion == [[2, 1], [0, 1]]

    def test_absent_class(self):
        m = compute_metrics([0, 0], [0, 0])
        red = m.per_class["red"]
        assert (red.precision, red.recall, red.f1, red.support) == (0.0, 0.0, 0.0, 0)
        assert m.macro.f1 == 100.0 and m.weighted.f1 == 100.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compute_metrics([0], [0, 1])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=50))
    def test_self_agreement(self, x):
        m = compute_metrics(x, x)
        assert m.weighted.f1 == m.macro.f1 == m.accuracy == 100.0
        assert m.weighted.precision == m.weighted.recall == 100.0

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_relabel_invariance(self, pairs):
        p, g = zip(*pairs)
        flip = lambda v: [1 - x for x in v]
        assert math.isclose(weighted_f1(p, g), weighted_f1(flip(p), flip(g)), abs_tol=1e-9)

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_f1_is_harmonic_mean_and_weighted_is_support_mean(self, pairs):
        p, g = zip(*pairs)
        m = compute_metrics(p, g)
        for c in m.per_class.values():
            assert math.isclose(c.f1, 100 * f1_from(c.precision / 100, c.recall / 100), abs_tol=1e-9)
        sup = [c.support for c in m.per_class.values()]
        assert math.isclose(m.weighted.f1, support_weighted([c.f1 for c in m.per_class.values()], sup), abs_tol=1e-9)


class TestTTest:
    def test_hand_example(self):
        r = paired_ttest([1, 2, 3, 4, 5], [2, 2, 4, 4, 6])
        assert math.isclose(r.mean_diff, -0.6)
        assert abs(r.t - (-2.449)) < 5e-4 and r.df == 4
        assert abs(r.p - 0.0705) < 1e-3

    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = rng.normal(size=5), rng.normal(size=5)
            ours = paired_ttest(a, b)
            ref = stats.ttest_rel(a, b)
            assert math.isclose(ours.t, ref.statistic, rel_tol=1e-9)
            assert math.isclose(ours.p, ref.pvalue, rel_tol=1e-8, abs_tol=1e-12)

    def test_identical(self):
        r = paired_ttest([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert (r.t, r.p, r.degenerate) == (0.0, 1.0, True)

    def test_constant_nonzero_difference(self):
        r = paired_ttest([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])
        assert r.t == math.inf and r.p == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            paired_ttest([1.0], [2.0])
        with pytest.raises(ValueError):
            paired_ttest([1.0, 2.0], [2.0])

    @given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=2, max_size=8))
    def test_antisymmetric(self, pairs):
        a, b = zip(*pairs)
        x, y = paired_ttest(a, b), paired_ttest(b, a)
        assert x.t == -y.t or (x.t == 0 and y.t == 0)
        assert x.p == y.p

    @given(st.floats(0.1, 30), st.floats(0.1, 30), st.floats(0, 1))
    def test_betainc_matches_scipy(self, a, b, x):
        assert math.isclose(betainc_regularized(a, b, x), special.betainc(a, b, x), rel_tol=1e-8, abs_tol=1e-12)


class TestBaselines:
    def test_most_frequent_reference_balance(self):
        res = baseline_most_frequent(stratified_kfold(REFERENCE, 5, 0), REFERENCE)
        assert abs(res.mean_test_wf1 - 60.37) <= 0.05
        assert abs(most_frequent_weighted_f1(1040 / 1443) - 60.37) <= 0.05

    def test_balanced_closed_form(self):
        assert abs(most_frequent_weighted_f1(0.5) - 33.33) < 0.005
        c = label_corpus(50, 50)
        res = baseline_most_frequent(stratified_kfold(c, 5, 0), c)
        assert abs(res.mean_test_wf1 - 100 / 3) < 1e-9

    def test_single_class(self):
        c = label_corpus(10, 0)
        ids = c.ids
        plan = FoldPlan(2, {i: j % 2 for j, i in enumerate(ids)}, [Fold(ids[1::2][:4], ids[1::2][4:], ids[::2]), Fold(ids[::2][:4], ids[::2][4:], ids[1::2])])
        assert baseline_most_frequent(plan, c).mean_test_wf1 == 100.0

    @given(st.integers(300, 1200), st.integers(0, 50))
    def test_closed_form_property(self, n_green, seed):
        n_red = 1443 - n_green
        c = label_corpus(n_green, n_red)
        p = max(n_green, n_red) / 1443
        res = baseline_most_frequent(stratified_kfold(c, 5, seed), c)
        assert abs(res.mean_test_wf1 - most_frequent_weighted_f1(p)) <= 0.05

    def test_idf_floor(self):
        v = TfidfVectorizer().fit([["a", "b"], ["a", "c"], ["a"]])
        assert v.idf[v.vocabulary["a"]] == 1.0
        assert math.isclose(v.idf[v.vocabulary["b"]], math.log(4 / 2) + 1)
        assert "a b" in v.vocabulary

    def test_rows_l2_normalized(self):
        x = TfidfVectorizer().fit_transform([["a", "b", "a"], ["c"]])
        assert np.allclose(np.sqrt(np.asarray(x.multiply(x).sum(axis=1)).ravel()), 1.0)

    def test_empty_vocab(self):
        with pytest.raises(DataError):
            TfidfVectorizer().fit([[], []])

    def test_separable_toy(self):
        rng = np.random.default_rng(0)
        docs, labels = [], []
        for i in range(60):
            red = i % 3 == 0
            toks = list(rng.choice(["the", "a", "run", "car", "day"], size=6))
            if red:
                toks.insert(int(rng.integers(0, 6)), "blood")
            docs.append(toks)
            labels.append(int(red))
        vec = TfidfVectorizer()
        x = vec.fit_transform(docs)
        svm = LinearSvm(seed=3).fit(x, labels)
        assert np.array_equal(svm.predict(x), labels)
        again = LinearSvm(seed=3).fit(x, labels)
        assert again.weights.tobytes() == svm.weights.tobytes()

    def test_tfidf_variant(self):
        c = label_corpus(40, 20, tokens=lambda i, lab: ["kill", "x"] if lab is Label.RED else ["x", "sun"])
        res = baseline_tfidf_linear(stratified_kfold(c, 4, 0), c, seed=1)
        assert res.mean_test_wf1 == 100.0


FAST = TrainConfig(lr=0.01, max_epochs=2, patience=2, batch_size=4)


def small_config(variants, tiny_model_cfg, **kw):
    return ExperimentConfig(variants=variants, k=3, seed=2, model=tiny_model_cfg, train=FAST, tfidf_epochs=3, **kw)


class TestExperiment:
    def test_default_grid(self):
        v = default_variants()
        assert len(v) == 17 and v[:2] == ["most_frequent", "tfidf"]
        assert "gmu:text+audio+video" in v and "late:audio+video" in v

    def test_single_entry_report(self, tiny_corpus, tiny_model_cfg):
        rep = run_experiment(tiny_corpus, small_config(["most_frequent"], tiny_model_cfg))
        assert list(rep.variants) == ["most_frequent"]
        assert len(rep.variants["most_frequent"].folds) == 3
        assert all(t.result is None for t in rep.ttests)

    def test_mean_is_fold_average(self, tiny_corpus, tiny_model_cfg):
        rep = run_experiment(tiny_corpus, small_config(["tfidf", "single:video"], tiny_model_cfg))
        for v in rep.variants.values():
            assert math.isclose(v.mean_test_wf1, sum(v.test_wf1) / 3)

    def test_failed_variant_recorded(self, tiny_corpus, tiny_model_cfg):
        no_video = tiny_corpus.map(lambda i: dataclasses.replace(i, frames=None))
        rep = run_experiment(no_video, small_config(["most_frequent", "single:video"], tiny_model_cfg))
        assert rep.variants["single:video"].error and "video" in rep.variants["single:video"].error
        assert rep.variants["most_frequent"].error is None
        assert "error" in render_table(rep)

    def test_late_reuses_singles(self, tiny_corpus, tiny_model_cfg):
        cfg = small_config(["single:text", "single:video", "late:text+video"], tiny_model_cfg)
        rep = run_experiment(tiny_corpus, cfg)
        alone = run_experiment(tiny_corpus, small_config(["late:text+video"], tiny_model_cfg))
        assert rep.variants["late:text+video"].test_wf1 == alone.variants["late:text+video"].test_wf1

    def test_report_round_trip_and_table(self, tiny_corpus, tiny_model_cfg, tmp_path):
        cfg = small_config(
            ["most_frequent", "single:text", "single:video", "gmu:text+video"],
            tiny_model_cfg,
            ttest_pairs=[("best_single", "gmu:text+video"), ("gmu:text+video", "most_frequent")],
        )
        rep = run_experiment(tiny_corpus, cfg)
        rep.save(tmp_path / "r.json")
        back = ExperimentReport.load(tmp_path / "r.json")
        assert back.dumps() == rep.dumps()
        table = render_table(back)
        for header in ("Model", "Val-WF", "Test-WF", "[Baselines]", "[Single modality]", "[Bimodal fusion]"):
            assert header in table
        assert back.ttests[0].a.startswith("best_single=single:")

    def test_significance_stars(self, tiny_corpus, tiny_model_cfg):
        rep = run_experiment(tiny_corpus, small_config(["most_frequent", "tfidf"], tiny_model_cfg, ttest_pairs=[("most_frequent", "tfidf")]))
        from mmtr.evalharness.experiment import TTestEntry
        from mmtr.evalharness.stats import TTestResult

        rep.ttests = [TTestEntry("most_frequent", "tfidf", TTestResult(-9.0, 0.001, 2, -5.0))]
        assert significant_variants(rep) == {"most_frequent", "tfidf"}
        lines = render_table(rep).splitlines()
        assert any(l.startswith("most_frequent") and l.endswith("*") for l in lines)

    def test_config_round_trip(self, tiny_model_cfg):
        cfg = small_config(["gmu:video+text"], tiny_model_cfg).validate()
        assert cfg.variants == ["gmu:text+video"]
        assert ExperimentConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"folds": 5})

    def test_bad_report_file(self, tmp_path):
        (tmp_path / "r.json").write_text('{"format": "other"}')
        with pytest.raises(DataError):
            ExperimentReport.load(tmp_path / "r.json")
