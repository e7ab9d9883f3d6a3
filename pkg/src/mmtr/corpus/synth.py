"""Deterministic synthetic trailer corpus with planted, modality-specific label cues.

Every instance draws a *carrier set*: the modalities in which its label is
planted. Outside the carrier set a modality is label-independent noise, so
a model that sees more modalities can recover more labels. The cues:

* text: carrier-red subtitles swap background words for red-marker words
  (all of them negative in the bundled lexicon) at ``text_marker_rate``;
  green carries no text cue.
* audio: band-limited noise; carrier-red adds short 900 Hz bursts,
  carrier-green a sustained 300 Hz tone.
* video: Gaussian frame features; carriers shift the first
  ``video_subspace`` dimensions by +/- ``video_shift`` inside a short window.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dsp import Signal
from ..errors import ConfigError
from ..numkit.rng import Rng, derive_seed
from .model import MODALITIES, Corpus, Label, TrailerInstance
from .wav import quantize

BACKGROUND_WORDS = """
the you i to a and it of that in is we what this me my for on have your be do
not are just know no get all with can was so but here go there he they like
right now out up one come she about want think look will how got see who well
if her him at us going them then time would back there's could man did more
why tell yes let's never need way make something where from take over people
again life only two has world thing little an said by day night love home good
new old maybe been really sure please thank thanks family friend friends little
very first last city town car road house room door window street water fire
light sun moon star sky sea river mountain forest garden school work job office
money story book letter phone call name girl boy woman mother father son
daughter brother sister baby kid kids king queen doctor police captain team
game music song dance party dinner coffee morning evening tonight tomorrow
yesterday year years week minute hour moment place something everything nothing
anything someone everyone nobody together alone always sometimes often talk
walk run stop start open close turn help find keep hold bring leave stay
remember forget believe understand listen watch wait try learn change happen
feel hope wish dream remember plan trust great best better happy funny strange
beautiful wonderful amazing big small long short high low fast slow hot cold
young old free ready real true wrong bad sad
""".split()

RED_MARKERS = """
kill killer murder blood bloody gun shot shoot knife stab damn hell fuck
fucking shit bastard bitch scream horror nightmare monster demon corpse
torture bomb explode brutal violent violence revenge dead die death drugs
drunk whore slut devil possessed
""".split()

CARRIER_POLICIES = ("complementary", "all", "random", "text-only", "audio-only", "video-only")


def _dedupe(words):
    return list(dict.fromkeys(w for w in words if w not in set(RED_MARKERS)))


BACKGROUND_WORDS = _dedupe(BACKGROUND_WORDS)


def _nonempty_subsets():
    for r in (1, 2, 3):
        yield from itertools.combinations(MODALITIES, r)


def carrier_distribution(policy) -> dict[tuple[str, ...], float]:
    """Probability of each carrier set under ``policy``.

    ``policy`` is a name from ``CARRIER_POLICIES`` or a mapping from
    '+'-joined modality names to weights.
    """
    if isinstance(policy, dict):
        dist = {}
        for key, w in policy.items():
            mods = tuple(m for m in MODALITIES if m in key.split("+"))
            if not mods or len(mods) != len(key.split("+")):
                raise ConfigError(f"bad carrier set {key!r}")
            dist[mods] = dist.get(mods, 0.0) + float(w)
        total = sum(dist.values())
        if total <= 0:
            raise ConfigError("carrier weights must sum to a positive value")
        return {k: v / total for k, v in dist.items()}
    if policy == "complementary":
        return {(m,): 1.0 / 3.0 for m in MODALITIES}
    if policy == "all":
        return {MODALITIES: 1.0}
    if policy == "random":
        subsets = list(_nonempty_subsets())
        return {s: 1.0 / len(subsets) for s in subsets}
    if policy.endswith("-only") and policy[:-5] in MODALITIES:
        return {(policy[:-5],): 1.0}
    raise ConfigError(f"unknown carrier policy {policy!r}; choose from {CARRIER_POLICIES}")


@dataclass(frozen=True)
class SynthParams:
    n_instances: int = 1443
    p_red: float = 403 / 1443
    tokens_per_instance: int = 100
    audio_seconds: float = 1.0
    sample_rate: int = 16000
    n_frames: int = 48
    frame_dim: int = 16
    carrier_policy: str | dict = "complementary"
    text_marker_rate: float = 0.1
    audio_noise_rms: float = 0.05
    audio_burst_amp: float = 0.3
    audio_tone_amp: float = 0.15
    video_shift: float = 2.5
    video_subspace: int = 4
    video_window: int = 12
    seed: int = 0
    id_prefix: str = "syn"
    extra: dict = field(default_factory=dict)

    def validate(self) -> "SynthParams":
        if not 0.0 < self.p_red < 1.0:
            raise ConfigError(f"p_red must lie in (0, 1), got {self.p_red}")
        for name in ("n_instances", "tokens_per_instance", "n_frames", "frame_dim", "sample_rate", "video_window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.audio_seconds * self.sample_rate < 1:
            raise ConfigError("audio must hold at least one sample")
        if not 0 <= self.text_marker_rate <= 1:
            raise ConfigError("text_marker_rate must lie in [0, 1]")
        if not 0 <= self.video_subspace <= self.frame_dim:
            raise ConfigError("video_subspace must lie in [0, frame_dim]")
        if self.video_window > self.n_frames:
            raise ConfigError("video_window cannot exceed n_frames")
        carrier_distribution(self.carrier_policy)
        return self

    def to_dict(self) -> dict:
        return asdict(self)


# average subtitle length of real trailers, for full-scale runs
PAPER_SCALE = SynthParams(tokens_per_instance=576)


def _zipf_probs(n: int) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1)
    return w / w.sum()


def _text(rng: Rng, params: SynthParams, red_cue: bool) -> list[str]:
    n = params.tokens_per_instance
    idx = rng.choice(len(BACKGROUND_WORDS), n, _zipf_probs(len(BACKGROUND_WORDS)))
    words = [BACKGROUND_WORDS[i] for i in idx]
    if red_cue:
        swap = rng.random(n) < params.text_marker_rate
        picks = rng.integers(len(RED_MARKERS), n)
        for pos in np.flatnonzero(swap):
            words[pos] = RED_MARKERS[picks[pos]]
    return words


def _band_noise(rng: Rng, n: int, sr: int, lo: float = 100.0, hi: float = 3000.0) -> np.ndarray:
    spec = np.fft.rfft(rng.normal((n,)))
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    spec[(freqs < lo) | (freqs > min(hi, sr / 2))] = 0.0
    x = np.fft.irfft(spec, n)
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def _audio(rng: Rng, params: SynthParams, cue: Label | None) -> Signal:
    sr = params.sample_rate
    n = max(1, int(round(params.audio_seconds * sr)))
    t = np.arange(n) / sr
    x = params.audio_noise_rms * _band_noise(rng, n, sr)
    if cue is Label.RED:
        burst = max(1, int(0.08 * sr))
        for _ in range(3):
            start = rng.integers(max(1, n - burst))
            seg = slice(start, min(n, start + burst))
            env = np.hanning(seg.stop - seg.start)
            x[seg] += params.audio_burst_amp * env * np.sin(2 * np.pi * 900.0 * t[seg])
    elif cue is Label.GREEN:
        phase = 2 * np.pi * rng.random()
        x += params.audio_tone_amp * np.sin(2 * np.pi * 300.0 * t + phase)
    return Signal(quantize(np.clip(x, -1.0, 32767 / 32768)), sr)


def _video(rng: Rng, params: SynthParams, cue: Label | None) -> np.ndarray:
    frames = rng.normal((params.n_frames, params.frame_dim))
    if cue is not None and params.video_subspace:
        start = rng.integers(params.n_frames - params.video_window + 1)
        sign = 1.0 if cue is Label.RED else -1.0
        frames[start : start + params.video_window, : params.video_subspace] += sign * params.video_shift
    return frames.astype(np.float32).astype(np.float64)


def generate_synthetic(params: SynthParams) -> Corpus:
    params.validate()
    dist = carrier_distribution(params.carrier_policy)
    sets = list(dist)
    probs = np.array([dist[s] for s in sets])
    master = Rng(derive_seed(params.seed, "synthetic-corpus"))
    labels = master.bernoulli(params.p_red, params.n_instances)
    carrier_idx = master.choice(len(sets), params.n_instances, probs)
    width = len(str(params.n_instances - 1))
    instances = []
    for i in range(params.n_instances):
        label = Label.RED if labels[i] else Label.GREEN
        carriers = sets[carrier_idx[i]]
        rng = Rng(derive_seed(params.seed, "instance", i))
        t_rng, a_rng, v_rng = rng.fork("text"), rng.fork("audio"), rng.fork("video")
        tokens = _text(t_rng, params, "text" in carriers and label is Label.RED)
        audio = _audio(a_rng, params, label if "audio" in carriers else None)
        frames = _video(v_rng, params, label if "video" in carriers else None)
        meta = {"carriers": "+".join(carriers), "source": "synthetic"}
        instances.append(TrailerInstance(f"{params.id_prefix}{i:0{width}d}", label, tokens, frames, audio, None, meta))
    return Corpus(instances)


def _observation(inst: TrailerInstance, modality: str) -> int:
    """What an ideal detector sees in one modality: +1 red cue, -1 green cue, 0 none."""
    carriers = inst.meta.get("carriers", "").split("+")
    if modality not in carriers:
        return 0
    if inst.label is Label.RED:
        return 1
    return 0 if modality == "text" else -1


def bayes_accuracy(corpus: Corpus, modalities, p_red: float, policy) -> float:
    """Accuracy of the Bayes-optimal rule given perfect cue detection in ``modalities``.

    Any red cue decides red, any green cue decides green; with no cue the
    rule predicts the class with the larger posterior under the generator's
    carrier distribution.
    """
    mods = set(modalities)
    dist = carrier_distribution(policy)
    # P(no visible cue | class)
    p_silent_red = sum(p for s, p in dist.items() if not mods & set(s))
    p_silent_green = sum(p for s, p in dist.items() if not (mods - {"text"}) & set(s))
    silent_guess = Label.RED if p_red * p_silent_red > (1 - p_red) * p_silent_green else Label.GREEN
    correct = 0
    for inst in corpus:
        obs = [_observation(inst, m) for m in mods]
        if 1 in obs:
            pred = Label.RED
        elif -1 in obs:
            pred = Label.GREEN
        else:
            pred = silent_guess
        correct += pred is inst.label
    return correct / len(corpus)
