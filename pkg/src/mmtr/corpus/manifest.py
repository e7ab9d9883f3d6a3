"""JSON-lines manifest: one trailer per line, side files relative to the manifest.

Record fields::

    {"id": str, "label": "green"|"red",
     "subtitle": "<path .srt|.tok>" | ["inline", "tokens"],
     "audio": "<path .wav|.mfc>", "frames": "<path .frm>",
     "meta": {str: str}, "empty_text": bool}

``audio``, ``frames``, ``meta`` and ``empty_text`` are optional.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from ..errors import DataError
from .binfmt import FRAMES_MAGIC, MFCC_MAGIC, read_matrix, write_matrix
from .model import Corpus, Label, TrailerInstance
from .srt import parse_srt_detailed
from .wav import read_wav, write_wav

log = logging.getLogger(__name__)

_KNOWN = {"id", "label", "subtitle", "audio", "frames", "meta", "empty_text"}


def read_tokens(path: Path) -> list[str]:
    if not path.is_file():
        raise DataError(f"missing subtitle file: {path}")
    text = path.read_text(encoding="utf-8", errors="replace")
    if path.suffix.lower() == ".srt":
        res = parse_srt_detailed(text)
        for w in res.warnings:
            log.warning("%s: %s", path, w)
        return res.tokens
    return text.split()


def _instance_from_record(rec: dict, base: Path, where: str) -> TrailerInstance:
    if not isinstance(rec, dict):
        raise DataError(f"{where}: record must be an object")
    missing = {"id", "label", "subtitle"} - rec.keys()
    if missing:
        raise DataError(f"{where}: missing field(s) {sorted(missing)}")
    unknown = rec.keys() - _KNOWN
    if unknown:
        raise DataError(f"{where}: unknown field(s) {sorted(unknown)}")
    try:
        label = Label.parse(rec["label"])
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from None

    sub = rec["subtitle"]
    if isinstance(sub, list):
        tokens = [str(t) for t in sub]
    elif isinstance(sub, str):
        tokens = read_tokens(base / sub)
    else:
        raise DataError(f"{where}: subtitle must be a path or a token list")

    audio = mfcc = None
    if rec.get("audio"):
        ap = base / rec["audio"]
        if ap.suffix.lower() == ".wav":
            audio = read_wav(ap)
        else:
            mfcc = read_matrix(ap, MFCC_MAGIC)
    frames = read_matrix(base / rec["frames"], FRAMES_MAGIC) if rec.get("frames") else None
    meta = {str(k): str(v) for k, v in (rec.get("meta") or {}).items()}
    empty = bool(rec.get("empty_text", False)) or not tokens
    return TrailerInstance(str(rec["id"]), label, tokens, frames, audio, mfcc, meta, empty)


def load_manifest(path) -> Corpus:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    base = path.parent
    instances = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{n}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: malformed record ({exc.msg})") from None
            inst = _instance_from_record(rec, base, where)
            if inst.id in seen:
                raise DataError(f"{where}: duplicate id {inst.id!r}")
            seen.add(inst.id)
            instances.append(inst)
    return Corpus(instances)


def _safe_name(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in s)


def write_corpus(corpus: Corpus, out_dir, manifest_name: str = "manifest.jsonl", token_files: bool = False) -> Path:
    """Write a manifest plus side files (WAV or MFC1 audio, FRM1 frames).

    With ``token_files`` subtitles go to ``tokens/<id>.tok`` (space separated)
    instead of being inlined in the manifest.
    """
    out = Path(out_dir)
    try:
        (out / "audio").mkdir(parents=True, exist_ok=True)
        (out / "frames").mkdir(parents=True, exist_ok=True)
        if token_files:
            (out / "tokens").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    lines = []
    for inst in corpus:
        stem = _safe_name(inst.id)
        rec: dict = {"id": inst.id, "label": str(inst.label), "subtitle": list(inst.tokens)}
        if token_files:
            rec["subtitle"] = f"tokens/{stem}.tok"
            (out / rec["subtitle"]).write_text(" ".join(inst.tokens) + "\n", encoding="utf-8")
        if inst.audio is not None:
            rec["audio"] = f"audio/{stem}.wav"
            write_wav(out / rec["audio"], inst.audio)
        elif inst.mfcc is not None:
            rec["audio"] = f"audio/{stem}.mfc"
            write_matrix(out / rec["audio"], inst.mfcc, MFCC_MAGIC)
        if inst.frames is not None:
            rec["frames"] = f"frames/{stem}.frm"
            write_matrix(out / rec["frames"], inst.frames, FRAMES_MAGIC)
        if inst.meta:
            rec["meta"] = dict(sorted(inst.meta.items()))
        if inst.empty_text:
            rec["empty_text"] = True
        lines.append(json.dumps(rec, ensure_ascii=False))
    path = out / manifest_name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
