"""Audio front-end: framing, spectra, mel filterbank, log-mel, MFCC and chunk averaging."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise DataError(f"sample rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise DataError("signal must be a non-empty 1-D sample array")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class DspConfig:
    sample_rate: int = 16000
    frame_len: int = 400
    hop: int = 160
    n_fft: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    fmin: float = 0.0
    fmax: float = 8000.0
    pre_emphasis: float = 0.97
    log_floor: float = 1e-10

    def validate(self, sample_rate: int | None = None) -> "DspConfig":
        sr = self.sample_rate if sample_rate is None else sample_rate
        if not 0 < self.hop <= self.frame_len <= self.n_fft:
            raise ConfigError("need 0 < hop <= frame_len <= n_fft")
        if self.n_fft & (self.n_fft - 1):
            raise ConfigError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 <= self.fmin < self.fmax <= sr / 2:
            raise ConfigError(f"need 0 <= fmin < fmax <= {sr / 2}")
        if not 1 <= self.n_coeffs <= self.n_mels:
            raise ConfigError("need 1 <= n_coeffs <= n_mels")
        if self.log_floor <= 0:
            raise ConfigError("log_floor must be positive")
        return self

    def for_rate(self, sample_rate: int) -> "DspConfig":
        """Same analysis windows in time, rescaled to another sample rate."""
        if sample_rate == self.sample_rate:
            return self
        scale = sample_rate / self.sample_rate
        frame_len = max(1, round(self.frame_len * scale))
        n_fft = 1 << max(0, (frame_len - 1).bit_length())
        return replace(
            self,
            sample_rate=sample_rate,
            frame_len=frame_len,
            hop=max(1, round(self.hop * scale)),
            n_fft=n_fft,
            fmax=min(self.fmax, sample_rate / 2),
        )


# spectrogram export for the audio-baseline representation
BASELINE_SPECTROGRAM = DspConfig(n_fft=2048, n_mels=128, n_coeffs=13)


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    return (n_samples - frame_len) // hop + 1


def frame_signal(sig: Signal, cfg: DspConfig) -> np.ndarray:
    """Pre-emphasize, slice into overlapping frames, apply a Hamming window."""
    x = sig.samples
    if x.size < cfg.frame_len:
        raise DataError(f"signal of {x.size} samples is shorter than one frame ({cfg.frame_len})")
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - cfg.pre_emphasis * x[:-1]
    n = frame_count(x.size, cfg.frame_len, cfg.hop)
    idx = np.arange(cfg.frame_len)[None, :] + cfg.hop * np.arange(n)[:, None]
    return y[idx] * np.hamming(cfg.frame_len)


def dft_magnitude(frame: np.ndarray, n_fft: int) -> np.ndarray:
    """|X_k| for k = 0..n_fft/2 of the zero-padded real frame(s)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[-1] > n_fft:
        raise DataError(f"frame of {frame.shape[-1]} samples exceeds n_fft={n_fft}")
    return np.abs(np.fft.rfft(frame, n=n_fft, axis=-1))


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequency must be non-negative")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    out = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def mel_centers(cfg: DspConfig) -> np.ndarray:
    """The n_mels + 2 filter edge/center frequencies in Hz."""
    mels = np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    return mel_to_hz(mels)


def mel_filterbank(cfg: DspConfig, sample_rate: int | None = None) -> np.ndarray:
    """Triangular filters on the rfft bin grid, peak height 1.

    Each filter rises linearly from edge ``k`` to its center ``k+1`` and
    falls to edge ``k+2``; the bin nearest the center is pinned to 1.
    """
    sr = cfg.sample_rate if sample_rate is None else sample_rate
    cfg.validate(sr)
    n_bins = cfg.n_fft // 2 + 1
    freqs = np.arange(n_bins) * sr / cfg.n_fft
    pts = mel_centers(cfg)
    bank = np.zeros((cfg.n_mels, n_bins))
    for m in range(cfg.n_mels):
        lo, mid, hi = pts[m], pts[m + 1], pts[m + 2]
        rise = (freqs - lo) / (mid - lo)
        fall = (hi - freqs) / (hi - mid)
        row = np.clip(np.minimum(rise, fall), 0.0, None)
        peak = int(np.argmin(np.abs(freqs - mid)))
        if row[peak] <= 0.0:
            raise ConfigError(
                f"mel filter {m} (center {mid:.1f} Hz) covers no FFT bin; "
                f"reduce n_mels={cfg.n_mels} or raise n_fft={cfg.n_fft}"
            )
        row[peak] = 1.0
        bank[m] = row
    return bank


def power_spectrogram(sig: Signal, cfg: DspConfig) -> np.ndarray:
    frames = frame_signal(sig, cfg)
    return dft_magnitude(frames, cfg.n_fft) ** 2


def log_mel_spectrogram(sig: Signal, cfg: DspConfig) -> np.ndarray:
    power = power_spectrogram(sig, cfg)
    energies = power @ mel_filterbank(cfg, sig.sample_rate).T
    return np.log(np.maximum(energies, cfg.log_floor))


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; row k holds coefficient k."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    basis = np.cos(np.pi * k * (2 * i + 1) / (2 * n)) * math.sqrt(2.0 / n)
    basis[0] /= math.sqrt(2.0)
    return basis


def mfcc(sig: Signal, cfg: DspConfig) -> np.ndarray:
    logmel = log_mel_spectrogram(sig, cfg)
    return logmel @ dct_matrix(cfg.n_mels)[: cfg.n_coeffs].T


def chunk_mfcc(m: np.ndarray, n_chunks: int) -> np.ndarray:
    """Average frames into ``n_chunks`` contiguous chunks.

    Frame ``t`` of ``F`` goes to chunk ``floor(t * n_chunks / F)``. When
    ``F < n_chunks`` some chunks are empty and copy the nearest non-empty
    chunk (lower index on ties).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0:
        raise DataError("chunk_mfcc needs a non-empty F x n_coeffs matrix")
    if n_chunks < 1:
        raise ValueError("n_chunks must be positive")
    n_frames = m.shape[0]
    owner = (np.arange(n_frames) * n_chunks) // n_frames
    counts = np.bincount(owner, minlength=n_chunks)
    sums = np.zeros((n_chunks, m.shape[1]))
    np.add.at(sums, owner, m)
    filled = np.flatnonzero(counts)
    out = np.empty_like(sums)
    out[filled] = sums[filled] / counts[filled, None]
    for c in np.flatnonzero(counts == 0):
        dist = np.abs(filled - c)
        out[c] = out[filled[np.argmin(dist)]]
    return out
