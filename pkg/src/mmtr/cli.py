"""Command-line entry point.

Every subcommand reads one JSON config file (``--config``); the listed flags
override it. Recognised top-level keys::

    seed, out, manifest, synth, model, train, experiment,
    variant, bundle, spectrogram

Exit codes: 0 success, 1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .corpus import Corpus, SynthParams, generate_synthetic, load_manifest, write_corpus
from .corpus.binfmt import MFCC_MAGIC, write_matrix
from .corpus.manifest import _safe_name
from .dsp import BASELINE_SPECTROGRAM, log_mel_spectrogram
from .errors import ConfigError, DataError, MmtrError
from .evalharness.folds import carve_validation
from .fusion import FusionSpec, ModelConfig, TrainConfig, forward, load_bundle, save_bundle, train
from .numkit import derive_seed
from .streams import audio_features

log = logging.getLogger("mmtr")

TOP_KEYS = {"seed", "out", "manifest", "synth", "model", "train", "experiment", "variant", "bundle", "spectrogram"}


@dataclasses.dataclass
class RunConfig:
    seed: int = 0
    out: str = "out"
    manifest: str | None = None
    synth: SynthParams = dataclasses.field(default_factory=SynthParams)
    model: ModelConfig = dataclasses.field(default_factory=ModelConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    experiment: dict = dataclasses.field(default_factory=dict)
    variant: str = "gmu:text+audio+video"
    bundle: str | None = None
    spectrogram: bool = False

    def experiment_config(self):
        from .evalharness.experiment import ExperimentConfig

        exp = ExperimentConfig.from_dict({**self.experiment, "seed": self.seed})
        exp.model, exp.train = self.model, self.train
        return exp.validate()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "out": self.out,
            "manifest": self.manifest,
            "synth": self.synth.to_dict(),
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "experiment": self.experiment_config().to_dict() if self.experiment is not None else None,
            "variant": self.variant,
            "bundle": self.bundle,
            "spectrogram": self.spectrogram,
        }


def _synth_from(d: dict) -> SynthParams:
    names = {f.name for f in dataclasses.fields(SynthParams)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown synth option(s): {sorted(unknown)}")
    return SynthParams(**d)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return doc


def resolve_config(doc: dict, args: argparse.Namespace) -> RunConfig:
    """Merge file values, then flags; validate everything before any work starts."""
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    doc = json.loads(json.dumps(doc))  # private copy
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    for key in ("manifest", "bundle"):
        if getattr(args, key, None) is not None:
            doc[key] = getattr(args, key)
    if args.n_chunks is not None:
        doc.setdefault("model", {})["n_chunks"] = args.n_chunks
    if args.frames is not None:
        doc.setdefault("model", {})["n_frames"] = args.frames
    if args.folds is not None:
        doc.setdefault("experiment", {})["k"] = args.folds
    if args.variant:
        if args.command == "eval":
            doc.setdefault("experiment", {})["variants"] = list(args.variant)
        else:
            doc["variant"] = args.variant[-1]
    if getattr(args, "spectrogram", False):
        doc["spectrogram"] = True
    try:
        cfg = RunConfig(
            seed=int(doc.get("seed", 0)),
            out=str(doc.get("out", "out")),
            manifest=doc.get("manifest"),
            synth=_synth_from({**doc.get("synth", {}), "seed": int(doc.get("seed", 0))}),
            model=ModelConfig.from_dict(doc.get("model", {})),
            train=TrainConfig.from_dict(doc.get("train", {})),
            experiment=dict(doc.get("experiment", {})),
            variant=str(doc.get("variant", "gmu:text+audio+video")),
            bundle=doc.get("bundle"),
            spectrogram=bool(doc.get("spectrogram", False)),
        )
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    cfg.model.validate()
    cfg.train.validate()
    cfg.synth.validate()
    FusionSpec.parse(cfg.variant)
    cfg.experiment_config()
    return cfg


def _echo(cfg: RunConfig, command: str) -> None:
    print(f"# mmtr {command} resolved config")
    print(json.dumps(cfg.to_dict(), indent=1, sort_keys=True))


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from None
    return out


def _corpus(cfg: RunConfig) -> Corpus:
    if not cfg.manifest:
        raise ConfigError("this command needs a corpus manifest (config 'manifest' or --manifest)")
    return load_manifest(cfg.manifest)


def cmd_gen(cfg: RunConfig) -> Path:
    corpus = generate_synthetic(cfg.synth)
    path = write_corpus(corpus, _out_dir(cfg))
    counts = corpus.class_counts
    print("counts " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    print(f"wrote {path}")
    return path


def cmd_featurize(cfg: RunConfig) -> Path:
    corpus = _corpus(cfg)
    out = _out_dir(cfg)
    if cfg.spectrogram:
        (out / "spectrograms").mkdir(exist_ok=True)

    def feat(inst):
        if inst.audio is None:
            return inst
        if cfg.spectrogram:
            spec_cfg = BASELINE_SPECTROGRAM.for_rate(inst.audio.sample_rate)
            rel = f"spectrograms/{_safe_name(inst.id)}.mfc"
            write_matrix(out / rel, log_mel_spectrogram(inst.audio, spec_cfg), MFCC_MAGIC)
            inst = dataclasses.replace(inst, meta={**inst.meta, "spectrogram": rel})
        return inst.with_mfcc(audio_features(inst, cfg.model.dsp))

    path = write_corpus(corpus.map(feat), out, token_files=True)
    print(f"featurized {len(corpus)} instances -> {path}")
    return path


def cmd_train(cfg: RunConfig) -> Path:
    corpus = _corpus(cfg)
    spec = FusionSpec.parse(cfg.variant)
    keep, val = carve_validation(corpus.ids, [int(x) for x in corpus.labels], 0.10, derive_seed(cfg.seed, "train-split"))
    bundle, trace = train(corpus.subset(keep), corpus.subset(val), spec, cfg.model, cfg.train, cfg.seed)
    out = _out_dir(cfg)
    save_bundle(bundle, out / "model.json")
    (out / "train_log.json").write_text(json.dumps(trace.to_dict(), indent=1) + "\n", encoding="utf-8")
    print(f"{spec.name}: best epoch {trace.best_epoch}, val WF {trace.best_val_wf1:.2f}")
    print(f"wrote {out / 'model.json'}")
    return out / "model.json"


def cmd_eval(cfg: RunConfig):
    from .evalharness.experiment import run_experiment
    from .evalharness.report import render_table

    report = run_experiment(_corpus(cfg), cfg.experiment_config())
    out = _out_dir(cfg)
    report.save(out / "report.json")
    table = render_table(report)
    (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return report


def cmd_predict(cfg: RunConfig) -> list[dict]:
    if not cfg.bundle:
        raise ConfigError("predict needs a model bundle (config 'bundle' or --bundle)")
    bundle = load_bundle(cfg.bundle)
    rows = []
    for inst in _corpus(cfg):
        pred = forward(inst, bundle)
        row = {"id": inst.id, "label": str(pred.label), "scores": [float(s) for s in pred.scores]}
        if pred.gates:
            row["gates"] = {m: round(float(np.mean(z)), 6) for m, z in pred.gates.items()}
        rows.append(row)
        print(json.dumps(row))
    return rows


def cmd_report(cfg: RunConfig) -> str:
    from .evalharness.experiment import ExperimentReport
    from .evalharness.report import render_table

    src = Path(cfg.out) / "report.json"
    if not src.is_file():
        raise DataError(f"no report document at {src}")
    table = render_table(ExperimentReport.load(src))
    (Path(cfg.out) / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return table


COMMANDS = {
    "gen": cmd_gen,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmtr", description="Multimodal trailer age-suitability classifier")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--variant", action="append", help="model variant, e.g. gmu:text+audio+video (repeatable)")
        p.add_argument("--folds", type=int)
        p.add_argument("--n-chunks", type=int, dest="n_chunks")
        p.add_argument("--frames", type=int)
        p.add_argument("--manifest")
        if name == "predict":
            p.add_argument("--bundle")
        if name == "featurize":
            p.add_argument("--spectrogram", action="store_true", help="also export 128-bin log-mel spectrograms")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(load_config(args.config), args)
        _echo(cfg, args.command)
        COMMANDS[args.command](cfg)
    except MmtrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
