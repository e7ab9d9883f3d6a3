"""16-bit PCM WAV reading and writing on top of the stdlib ``wave`` module."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from ..dsp import Signal
from ..errors import DataError


def read_wav(path) -> Signal:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"missing audio file: {p}")
    try:
        with wave.open(str(p), "rb") as w:
            channels, width, rate, n = w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()
            raw = w.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise DataError(f"{p}: not a PCM WAV file ({exc})") from exc
    if width != 2:
        raise DataError(f"{p}: only 16-bit PCM is supported, found {8 * width}-bit")
    if len(raw) != n * channels * width:
        raise DataError(f"{p}: truncated audio data ({len(raw)} of {n * channels * width} bytes)")
    if n == 0:
        raise DataError(f"{p}: no audio samples")
    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64).reshape(n, channels)
    return Signal(pcm.mean(axis=1) / 32768.0, rate)


def quantize(samples: np.ndarray) -> np.ndarray:
    """Round to the 16-bit grid so a write/read cycle is lossless."""
    return np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767) / 32768.0


def write_wav(path, sig: Signal) -> None:
    pcm = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sig.sample_rate)
        w.writeframes(pcm.tobytes())
