"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (with the measured values) that the
terminal summary prints at the end of the run; see ``conftest.py``.
"""

import contextlib
import json
import math
import time

import numpy as np
import pytest

from mmtr import numkit as nk
from mmtr.cli import main
from mmtr.corpus import Corpus, EmotionLexicon, Label, SynthParams, TrailerInstance, build_vocab, generate_synthetic
from mmtr.dsp import DspConfig, Signal, dct_matrix, dft_magnitude, frame_count, frame_signal, hz_to_mel, log_mel_spectrogram, mel_centers, mfcc
from mmtr.evalharness import carve_validation, compute_metrics, f1_from, paired_ttest, stratified_kfold, support_weighted
from mmtr.evalharness.experiment import ExperimentConfig, baseline_most_frequent, run_experiment
from mmtr.evalharness.report import render_table
from mmtr.fusion import BimodalGmuParams, FusionSpec, GmuParams, ModelConfig, TrainConfig, gmu_bimodal, gmu_trimodal, init_bundle, train
from mmtr.fusion.train import evaluate_wf1, instance_loss
from mmtr.numkit import Rng, Tensor, grad_check
from mmtr.streams import fit_audio_normalization

RESULTS: dict[int, str] = {}


@contextlib.contextmanager
def criterion(n, title, budget_s):
    notes = []
    start = time.perf_counter()
    try:
        yield notes
        elapsed = time.perf_counter() - start
        notes.append(f"{elapsed:.1f}s of {budget_s}s")
        assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"
    except BaseException as exc:
        RESULTS[n] = f"FAIL criterion {n:>2} {title}: {'; '.join(notes)} -- {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}"
        raise
    RESULTS[n] = f"PASS criterion {n:>2} {title}: {'; '.join(notes)}"


def check(notes, ok, msg):
    notes.append(("ok " if ok else "BAD ") + msg)
    return ok


def reference_corpus():
    labels = [Label.GREEN] * 1040 + [Label.RED] * 403
    return Corpus(TrailerInstance(f"t{i:04d}", lab, ["w"], None) for i, lab in enumerate(labels))


def test_criterion_01_most_frequent_baseline():
    with criterion(1, "most-frequent baseline = 60.37", 1.0) as notes:
        c = reference_corpus()
        wf = baseline_most_frequent(stratified_kfold(c, 5, seed=0), c).mean_test_wf1
        notes.append(f"test WF {wf:.3f}")
        assert abs(wf - 60.37) <= 0.05


def test_criterion_02_metric_arithmetic():
    with criterion(2, "published metric arithmetic", 1.0) as notes:
        green = 100 * f1_from(0.874, 0.950)
        red = 100 * f1_from(0.836, 0.650)
        # macro and weighted follow from the table's per-class F1 values
        macro = (91.0 + 72.8) / 2
        weighted = support_weighted([91.0, 72.8], [1040, 403])
        oks = [
            check(notes, abs(green - 91.0) <= 0.05, f"green F1 {green:.2f} vs 91.0"),
            check(notes, abs(red - 72.8) <= 0.05, f"red F1 {red:.2f} vs 72.8"),
            check(notes, abs(macro - 81.9) <= 0.15 and abs(macro - 82.0) <= 0.15, f"macro {macro:.2f}"),
            check(notes, abs(weighted - 85.9) <= 0.05 and abs(weighted - 86.0) <= 0.5, f"weighted {weighted:.2f}"),
        ]
        # the same numbers through compute_metrics on a confusion matrix built to match
        m = compute_metrics([0] * 95 + [1] * 5 + [1] * 65 + [0] * 35, [0] * 100 + [1] * 100)
        check(notes, math.isclose(m.per_class["green"].f1, 100 * f1_from(95 / 130, 0.95)), "compute_metrics agrees with f1_from")
        assert all(oks), "red F1 from P=83.6, R=65.0 is 73.14, outside 72.8 +- 0.05"


def test_criterion_03_gradient_integrity(tiny_corpus):
    with criterion(3, "trimodal GMU gradient check", 60.0) as notes:
        cfg = ModelConfig(d_e=4, d_h=6, d_s=6, d_f=6, n_chunks=5, n_frames=6)
        insts = list(tiny_corpus)
        vocab = build_vocab([i.tokens for i in insts])
        bundle = init_bundle(FusionSpec.parse("gmu:text+audio+video"), cfg, Rng(1), vocab, EmotionLexicon.bundled(), insts[0].frames.shape[1])
        fit_audio_normalization(insts, bundle.streams["audio"])
        tc = TrainConfig()
        params = bundle.parameters()
        loss = lambda: nk.add(instance_loss(insts[0], bundle, tc), instance_loss(insts[1], bundle, tc))
        rep = grad_check(loss, params)
        notes.append(f"{len(params)} tensors, worst rel err {rep.worst:.2e}")
        assert rep.passed, rep.summary()
        for p in params.values():
            p.grad = None
        loss().backward()
        corrupted = {k: p.grad.copy() for k, p in params.items()}
        corrupted["fusion.w1"] *= 1.01
        neg = grad_check(loss, params, analytic=corrupted)
        check(notes, not neg.passed and neg.failures == ["fusion.w1"], "corrupted gradient rejected")
        assert not neg.passed


def test_criterion_04_dsp_oracles():
    with criterion(4, "DSP oracles", 30.0) as notes:
        rng = np.random.default_rng(4)
        worst = 0.0
        for n_fft in (8, 64, 256, 512):
            x = rng.uniform(-1, 1, n_fft - 3)
            t = np.arange(n_fft)
            xp = np.concatenate([x, np.zeros(3)])
            naive = np.array([abs(np.sum(xp * np.exp(-2j * np.pi * k * t / n_fft))) for k in range(n_fft // 2 + 1)])
            worst = max(worst, float(np.max(np.abs(dft_magnitude(x, n_fft) - naive))))
        check(notes, worst < 1e-9, f"DFT max err {worst:.1e}")
        sig = Signal(0.5 * np.sin(2 * np.pi * 440 * np.arange(8000) / 16000), 16000)
        cfg = DspConfig()
        centers = mel_centers(cfg)[1:-1]
        nearest = int(np.argmin(np.abs(hz_to_mel(centers) - hz_to_mel(440.0))))
        peak_ok = bool(np.all(log_mel_spectrogram(sig, cfg).argmax(axis=1) == nearest))
        check(notes, peak_ok, f"440 Hz peaks at filter {nearest}")
        noise = Signal(rng.uniform(-0.5, 0.5, 4000), 16000)
        c26 = DspConfig(n_coeffs=26)
        dct_err = float(np.max(np.abs(mfcc(noise, c26) @ dct_matrix(26) - log_mel_spectrogram(noise, c26))))
        check(notes, dct_err < 1e-9, f"DCT round trip {dct_err:.1e}")
        lengths = rng.integers(400, 40000, 200)
        counts_ok = all(
            frame_signal(Signal(np.zeros(n), 16000), cfg).shape[0] == (n - 400) // 160 + 1 == frame_count(n, 400, 160)
            for n in lengths
        )
        check(notes, counts_ok, "frame counts over 200 lengths")
        assert worst < 1e-9 and peak_ok and dct_err < 1e-9 and counts_ok


ACCEPT_SYNTH = SynthParams(seed=7, tokens_per_instance=40)
ACCEPT_MODEL = ModelConfig(d_e=8, d_h=16, d_s=16, d_f=16, n_chunks=10, n_frames=18)
ACCEPT_TRAIN = TrainConfig(lr=0.01, max_epochs=12, patience=4, batch_size=8)


@pytest.mark.slow
def test_criterion_05_fusion_gain():
    with criterion(5, "fusion gain on the seed-7 synthetic corpus", 900.0) as notes:
        corpus = generate_synthetic(ACCEPT_SYNTH)
        counts = corpus.class_counts
        notes.append(f"corpus {counts[Label.GREEN]}/{counts[Label.RED]}")
        report = run_experiment(corpus, ExperimentConfig(seed=7, k=5, model=ACCEPT_MODEL, train=ACCEPT_TRAIN))
        print(render_table(report))
        wf = {n: v.mean_test_wf1 for n, v in report.variants.items()}
        singles = {m: wf[f"single:{m}"] for m in ("text", "audio", "video")}
        best_single = max(singles.values())
        bimodal = {n: v for n, v in wf.items() if n.count("+") == 1}
        oks = [check(notes, wf["gmu:text+audio+video"] >= best_single + 3.0, f"GMU tri {wf['gmu:text+audio+video']:.2f} vs best single {best_single:.2f} + 3")]
        for n, v in bimodal.items():
            a, b = n.split(":")[1].split("+")
            oks.append(v >= max(singles[a], singles[b]))
        check(notes, all(oks[1:]), f"every bimodal >= its best single (min margin {min(v - max(singles[m] for m in n.split(':')[1].split('+')) for n, v in bimodal.items()):.2f})")
        best_bi = max(bimodal.values())
        for s in ("gmu", "concat", "late"):
            tri = wf[f"{s}:text+audio+video"]
            oks.append(check(notes, tri >= best_bi - 1.0, f"{s} tri {tri:.2f} vs best bimodal {best_bi:.2f} - 1"))
        assert all(oks)


def test_criterion_06_gmu_algebra():
    with criterion(6, "GMU saturation and bounds", 10.0) as notes:
        from scipy.special import expit

        d_s, d_f = 5, 4
        p3 = GmuParams.init(Rng(0), d_s, d_f)
        ones = Tensor(np.ones(d_s))
        for y, sgn in zip(p3.y, (1, -1, -1)):
            y.data[...] = sgn * 30.0 / (3 * d_s)
        h3, _ = gmu_trimodal(ones, ones, ones, p3)
        e3 = float(np.max(np.abs(h3.data - np.tanh(p3.w[0].data @ ones.data))))
        p2 = BimodalGmuParams.init(Rng(1), d_s, d_f)
        p2.y.data[...] = 60.0 / (2 * d_s)
        h2, _ = gmu_bimodal(ones, ones, p2)
        e2 = float(np.max(np.abs(h2.data - np.tanh(p2.w[0].data @ ones.data))))
        check(notes, e3 < 1e-9 and e2 < 1e-9, f"saturation errors {e3:.1e}, {e2:.1e}")
        # 10^5 random inputs, evaluated in bulk with the unit's own parameters
        r = np.random.default_rng(6)
        X = [r.uniform(-1, 1, (100_000, d_s)) for _ in range(3)]
        g3 = GmuParams.init(Rng(2), d_s, d_f)
        J = np.concatenate(X, axis=1)
        H3 = sum(expit(J @ (3 * y.data).T) * np.tanh(x @ (3 * w.data).T) for w, y, x in zip(g3.w, g3.y, X))
        g2 = BimodalGmuParams.init(Rng(3), d_s, d_f)
        z = expit(np.concatenate(X[:2], axis=1) @ (3 * g2.y.data).T)
        H2 = z * np.tanh(X[0] @ (3 * g2.w[0].data).T) + (1 - z) * np.tanh(X[1] @ (3 * g2.w[1].data).T)
        b3, b2 = float(np.max(np.abs(H3))), float(np.max(np.abs(H2)))
        check(notes, b3 < 3 and b2 < 1, f"max |h| tri {b3:.3f}, bi {b2:.3f}")
        sample_ok = True
        for i in range(0, 100_000, 10_000):
            h, _ = gmu_trimodal(*(Tensor(x[i]) for x in X), g3)
            sample_ok &= bool(np.all(np.abs(h.data) < 3))
            h, _ = gmu_bimodal(Tensor(X[0][i]), Tensor(X[1][i]), g2)
            sample_ok &= bool(np.all(np.abs(h.data) < 1))
        assert e3 < 1e-9 and e2 < 1e-9 and b3 < 3 and b2 < 1 and sample_ok


def test_criterion_07_protocol_invariants():
    with criterion(7, "stratified folds and validation carve-out", 5.0) as notes:
        c = reference_corpus()
        plan = stratified_kfold(c, 5, seed=7)
        sizes = sorted((len(f.test) for f in plan.folds), reverse=True)
        reds = sorted((sum(c[i].label is Label.RED for i in f.test) for f in plan.folds), reverse=True)
        notes.append(f"sizes {sizes}, red {reds}")
        assert sizes == [289, 289, 289, 288, 288] and reds == [81, 81, 81, 80, 80]
        assert sorted(i for f in plan.folds for i in f.test) == sorted(c.ids)
        for f in plan.folds:
            n_red = sum(c[i].label is Label.RED for i in f.test)
            assert abs(n_red - len(f.test) * 403 / 1443) < 1
            portion = len(f.train) + len(f.val)
            assert len(f.val) == math.floor(0.1 * portion + 0.5)
            assert not set(f.val) & set(f.train) and not set(f.test) & set(f.train + f.val)
            val_red = sum(c[i].label is Label.RED for i in f.val)
            assert abs(val_red - len(f.val) * 403 / 1443) < 1
        keep, val = carve_validation([f"x{i}" for i in range(100)], [0] * 72 + [1] * 28, 0.1, 0)
        notes.append(f"carve 100 -> {len(val)} val")
        assert len(val) == 10 and sum(int(v[1:]) >= 72 for v in val) == 3


def test_criterion_08_statistics():
    with criterion(8, "paired t-test oracle", 1.0) as notes:
        r = paired_ttest([1, 2, 3, 4, 5], [2, 2, 4, 4, 6])
        notes.append(f"t={r.t:.4f} p={r.p:.4f} df={r.df}")
        assert abs(r.t + 2.449) <= 1e-3 and abs(r.p - 0.0705) <= 1e-3 and r.df == 4
        same = paired_ttest([3.0, 4.0, 5.0], [3.0, 4.0, 5.0])
        const = paired_ttest([5.0, 6.0, 7.0], [4.0, 5.0, 6.0])
        assert (same.t, same.p) == (0.0, 1.0)
        assert const.degenerate and const.p == 0.0 and math.isinf(const.t)


def test_criterion_09_determinism(tmp_path):
    with criterion(9, "byte-identical gen and eval reruns", 1200.0) as notes:
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "seed": 7,
            "synth": {"n_instances": 80, "tokens_per_instance": 20, "audio_seconds": 0.3},
            "model": {"d_e": 4, "d_h": 8, "d_s": 8, "d_f": 8, "n_chunks": 5, "n_frames": 8},
            "train": {"lr": 0.01, "max_epochs": 3, "patience": 2},
            "experiment": {"variants": ["most_frequent", "tfidf", "single:audio", "late:text+video", "gmu:text+audio+video"], "k": 3},
        }))
        trees = []
        for run in ("a", "b"):
            assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
            trees.append({str(p.relative_to(tmp_path / run)): p.read_bytes() for p in sorted((tmp_path / run).rglob("*")) if p.is_file()})
        check(notes, trees[0] == trees[1], f"gen trees identical ({len(trees[0])} files)")
        reports = []
        for run in ("ea", "eb"):
            assert main(["eval", "--config", str(cfg), "--manifest", str(tmp_path / "a" / "manifest.jsonl"), "--out", str(tmp_path / run)]) == 0
            reports.append((tmp_path / run / "report.json").read_bytes())
        check(notes, reports[0] == reports[1], "eval reports identical")
        assert trees[0] == trees[1] and reports[0] == reports[1]


def separable_set():
    return generate_synthetic(SynthParams(
        n_instances=16, p_red=0.5, tokens_per_instance=20, audio_seconds=0.3, n_frames=12, frame_dim=6,
        video_window=6, video_shift=3.0, carrier_policy="all", text_marker_rate=0.3, seed=10,
    ))


@pytest.mark.parametrize("variant", ["single:text", "late:text+audio+video", "concat:text+audio+video", "gmu:text+audio+video"])
def test_criterion_10_capacity(variant):
    with criterion(10, "16-instance capacity within 300 epochs", 120.0) as notes:
        insts = list(separable_set())
        cfg = ModelConfig(d_e=8, d_h=8, d_s=8, d_f=8, n_chunks=5, n_frames=8)
        tc = TrainConfig(lr=0.01, max_epochs=300, patience=20, batch_size=4)
        bundle, log = train(insts, insts, FusionSpec.parse(variant), cfg, tc, seed=0)
        wf = evaluate_wf1(insts, bundle)
        prev = RESULTS.get(10, "")
        notes.append(f"{variant} train WF {wf:.1f}")
        assert wf == 100.0
    if prev.startswith("PASS"):
        RESULTS[10] = prev + "; " + RESULTS[10].split(": ", 1)[1]
