"""ModelBundle file format.

A bundle is one JSON document::

    {"format": "mmtr-bundle", "version": 1,
     "spec": "gmu:text+audio+video",
     "config": {...}, "train_config": {...},
     "d_v": 16 | null,
     "vocab": {"words": [...], "n_buckets": 1024} | null,
     "lexicon": {"word": ["cat", ...], ...} | null,
     "tensors": {"text.lstm.w_x": {"shape": [256, 32], "data": "<base64>"}, ...},
     "buffers": {"audio.shift": {...}, "audio.scale": {...}}}

``buffers`` hold fixed arrays such as the audio feature normalization.

Tensor payloads are little-endian float64, C order, base64 encoded, so a
round trip reproduces every parameter bit for bit.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from ..corpus.lexicon import EmotionLexicon
from ..corpus.vocab import Vocabulary
from ..errors import ConfigError, DataError
from ..numkit import Rng
from .model import FusionSpec, ModelBundle, ModelConfig, init_bundle

FORMAT = "mmtr-bundle"
VERSION = 1


def _encode(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(d: dict, name: str) -> np.ndarray:
    shape = tuple(d["shape"])
    raw = base64.b64decode(d["data"])
    if len(raw) != 8 * int(np.prod(shape, dtype=np.int64)):
        raise DataError(f"tensor {name}: payload size does not match shape {shape}")
    return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)


def bundle_to_dict(bundle: ModelBundle) -> dict:
    text = bundle.streams.get("text")
    video = bundle.streams.get("video")
    return {
        "format": FORMAT,
        "version": VERSION,
        "spec": bundle.spec.name,
        "config": bundle.config.to_dict(),
        "train_config": bundle.train_config,
        "d_v": video.d_v if video is not None else None,
        "vocab": {"words": text.vocab.words, "n_buckets": text.vocab.n_buckets} if text is not None else None,
        "lexicon": text.lexicon.to_dict() if text is not None else None,
        "tensors": {k: _encode(t.data) for k, t in bundle.parameters().items()},
        "buffers": {k: _encode(v) for k, v in bundle.buffers().items()},
    }


def bundle_from_dict(doc: dict) -> ModelBundle:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise DataError("not a model bundle document")
    if doc.get("version") != VERSION:
        raise DataError(f"unsupported bundle version {doc.get('version')!r}")
    spec = FusionSpec.parse(doc["spec"])
    cfg = ModelConfig.from_dict(doc["config"])
    vocab = lexicon = None
    if doc.get("vocab") is not None:
        vocab = Vocabulary(doc["vocab"]["words"], doc["vocab"]["n_buckets"])
        lexicon = EmotionLexicon(doc["lexicon"] or {})
    bundle = init_bundle(spec, cfg, Rng(0), vocab, lexicon, doc.get("d_v"))
    bundle.train_config = dict(doc.get("train_config") or {})
    params = bundle.parameters()
    stored = doc["tensors"]
    if set(stored) != set(params):
        missing, extra = sorted(set(params) - set(stored)), sorted(set(stored) - set(params))
        raise DataError(f"bundle tensors do not match the model (missing {missing}, unexpected {extra})")
    for name, t in params.items():
        arr = _decode(stored[name], name)
        if arr.shape != t.data.shape:
            raise DataError(f"tensor {name}: shape {arr.shape}, model expects {t.data.shape}")
        t.data = arr.copy()
    for name, d in (doc.get("buffers") or {}).items():
        modality, _, attr = name.partition(".")
        stream = bundle.streams.get(modality)
        if stream is None or attr not in ("shift", "scale") or not hasattr(stream, attr):
            raise DataError(f"unexpected buffer {name}")
        setattr(stream, attr, _decode(d, name))
    return bundle


def save_bundle(bundle: ModelBundle, path) -> None:
    Path(path).write_text(json.dumps(bundle_to_dict(bundle), indent=1) + "\n", encoding="utf-8")


def load_bundle(path) -> ModelBundle:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{p}: no such bundle file")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: not valid JSON ({exc})") from exc
    try:
        return bundle_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise DataError(f"{p}: malformed bundle ({exc})") from exc
    except ConfigError as exc:
        raise DataError(f"{p}: {exc}") from exc
