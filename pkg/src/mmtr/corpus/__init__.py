"""Data model, file ingestion, emotion lexicon, vocabulary and synthetic corpora."""

from .binfmt import FRAMES_MAGIC, MFCC_MAGIC, read_matrix, write_matrix
from .lexicon import CATEGORIES, EmotionLexicon, emotion_vector
from .manifest import load_manifest, write_corpus
from .model import MODALITIES, Corpus, Label, TrailerInstance
from .srt import parse_srt, parse_srt_detailed, tokenize
from .synth import PAPER_SCALE, SynthParams, bayes_accuracy, carrier_distribution, generate_synthetic
from .vocab import OOV_BUCKETS, Vocabulary, build_vocab
from .wav import read_wav, write_wav

__all__ = [
    "CATEGORIES",
    "Corpus",
    "EmotionLexicon",
    "FRAMES_MAGIC",
    "Label",
    "MFCC_MAGIC",
    "MODALITIES",
    "OOV_BUCKETS",
    "PAPER_SCALE",
    "SynthParams",
    "TrailerInstance",
    "Vocabulary",
    "bayes_accuracy",
    "build_vocab",
    "carrier_distribution",
    "emotion_vector",
    "generate_synthetic",
    "load_manifest",
    "parse_srt",
    "parse_srt_detailed",
    "read_matrix",
    "read_wav",
    "tokenize",
    "write_corpus",
    "write_matrix",
    "write_wav",
]
